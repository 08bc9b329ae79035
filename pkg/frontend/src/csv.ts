/**
 * Reader for echochain CSV files: '#'-prefixed metadata lines holding
 * `key = <json>`, then a header row and numeric columns.  Values parse
 * through Number(), so every shortest-round-trip decimal written by the
 * simulator maps back to the identical binary64.
 */

import * as fs from "fs";

export interface Table {
  meta: Record<string, unknown>;
  columns: Record<string, number[]>;
  order: string[];
}

export function parseTable(text: string, source = "<string>"): Table {
  const meta: Record<string, unknown> = {};
  const columns: Record<string, number[]> = {};
  let order: string[] | null = null;
  for (const raw of text.split(/\r?\n/)) {
    const line = raw.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      if (eq < 0) continue;
      const key = line.slice(1, eq).trim();
      meta[key] = JSON.parse(line.slice(eq + 1).trim());
    } else if (order === null) {
      order = line.split(",").map((c) => c.trim());
      for (const name of order) columns[name] = [];
    } else {
      const parts = line.split(",");
      if (parts.length !== order.length) {
        throw new Error(`${source}: row with ${parts.length} fields, expected ${order.length}`);
      }
      parts.forEach((value, i) => {
        const x = Number(value);
        if (!Number.isFinite(x) && value.trim() !== "nan") {
          throw new Error(`${source}: non-numeric value ${JSON.stringify(value)}`);
        }
        columns[order![i]].push(x);
      });
    }
  }
  if (order === null) throw new Error(`${source}: no header row found`);
  return { meta, columns, order };
}

export function readTable(path: string): Table {
  return parseTable(fs.readFileSync(path, "utf-8"), path);
}

/** Symmetry-class index of a curve file: 1 (tri) or 2 (non_tri), if stated. */
export function betaOf(table: Table): number | null {
  if (typeof table.meta["beta"] === "number") return table.meta["beta"] as number;
  const klass = table.meta["class"];
  if (klass === "tri") return 1;
  if (klass === "non_tri") return 2;
  return null;
}

export function epsilonOf(table: Table): number | null {
  const eps = table.meta["epsilon"];
  return typeof eps === "number" ? eps : null;
}

/**
 * Inputs overlaid in one figure must agree on symmetry class and
 * perturbation strength; anything else is a wiring mistake upstream.
 */
export function assertCompatible(tables: Table[], labels: string[]): void {
  const betas = tables.map(betaOf).filter((b) => b !== null) as number[];
  if (new Set(betas).size > 1) {
    throw new Error(`metadata mismatch: symmetry classes differ across inputs (${labels.join(", ")})`);
  }
  const epsilons = tables.map(epsilonOf).filter((e) => e !== null) as number[];
  for (let i = 1; i < epsilons.length; i++) {
    const rel = Math.abs(epsilons[i] - epsilons[0]) / Math.max(Math.abs(epsilons[0]), 1e-300);
    if (rel > 1e-9) {
      throw new Error(
        `metadata mismatch: epsilon ${epsilons[0]} vs ${epsilons[i]} (${labels.join(", ")})`
      );
    }
  }
}
