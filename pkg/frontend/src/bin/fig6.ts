import { runFigure } from "../cli";

process.exit(runFigure("fig6", process.argv.slice(2)));
