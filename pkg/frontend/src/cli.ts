/** Shared argument handling for the one-script-per-figure entry points. */

import * as fs from "fs";
import { figDecay, figOrthogonal, figRevival } from "./figures";

export interface Parsed {
  out: string | null;
  band: boolean;
  positional: string[];
  named: Record<string, string[]>;
}

export function parseArgs(argv: string[], listFlags: string[] = []): Parsed {
  const parsed: Parsed = { out: null, band: false, positional: [], named: {} };
  let current: string | null = null;
  for (const arg of argv) {
    if (arg === "--out") {
      current = "__out";
    } else if (arg === "--band") {
      parsed.band = true;
      current = null;
    } else if (arg.startsWith("--") && listFlags.includes(arg.slice(2))) {
      current = arg.slice(2);
      parsed.named[current] = parsed.named[current] ?? [];
    } else if (current === "__out") {
      parsed.out = arg;
      current = null;
    } else if (current !== null) {
      parsed.named[current].push(arg);
    } else {
      parsed.positional.push(arg);
    }
  }
  return parsed;
}

export function runFigure(name: "fig3" | "fig5" | "fig6", argv: string[]): number {
  try {
    let svg: string;
    if (name === "fig3") {
      const p = parseArgs(argv, ["exact", "elr"]);
      if (!p.out || p.positional.length === 0) {
        throw new Error("usage: fig3 --out FIG.svg FIDELITY.csv... [--exact RMT.csv...] [--elr ELR.csv...] [--band]");
      }
      svg = figDecay({ data: p.positional, exact: p.named["exact"], elr: p.named["elr"] }, { band: p.band });
      fs.writeFileSync(p.out, svg);
    } else if (name === "fig5") {
      const p = parseArgs(argv);
      if (!p.out || p.positional.length !== 2) {
        throw new Error("usage: fig5 --out FIG.svg FIDELITY.csv RMT.csv");
      }
      svg = figRevival(p.positional[0], p.positional[1]);
      fs.writeFileSync(p.out, svg);
    } else {
      const p = parseArgs(argv);
      if (!p.out || p.positional.length < 2 || p.positional.length > 3) {
        throw new Error("usage: fig6 --out FIG.svg FIDELITY.csv MC.csv [ELR.csv]");
      }
      svg = figOrthogonal(p.positional[0], p.positional[1], p.positional[2]);
      fs.writeFileSync(p.out, svg);
    }
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}
