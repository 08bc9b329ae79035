import { runFigure } from "../cli";

process.exit(runFigure("fig3", process.argv.slice(2)));
