import { runFigure } from "../cli";

process.exit(runFigure("fig5", process.argv.slice(2)));
