/**
 * The three figure families: fidelity-decay overlays, the recovery
 * close-up with error bands, and the orthogonal-class comparison.  Each
 * takes echochain CSV paths, checks that the inputs belong together
 * (symmetry class, perturbation strength), and renders one SVG.  The
 * numbers pass through untouched: series are plotted exactly as read.
 */

import { readTable, assertCompatible, epsilonOf, Table } from "./csv";
import { renderSvg, Series } from "./svg";

const COLORS = ["#1965b0", "#dc050c", "#4eb265", "#f7a800", "#882e72", "#777777"];

export interface DecayInputs {
  data: string[];   // fidelity runs (possibly several epsilons)
  exact?: string[]; // closed-form curves, matched to runs by epsilon
  elr?: string[];
}

function groupKey(t: Table): string {
  const eps = epsilonOf(t);
  return eps === null ? "?" : String(eps);
}

/** Decay overlays: one point set per run plus exact/ELR curves (fig3 style). */
export function figDecay(inputs: DecayInputs, out: { band?: boolean } = {}): string {
  if (inputs.data.length === 0) throw new Error("usage: at least one fidelity CSV is required");
  const runs = inputs.data.map(readTable);
  const exact = (inputs.exact ?? []).map(readTable);
  const elr = (inputs.elr ?? []).map(readTable);
  for (const run of runs) {
    const eps = groupKey(run);
    const same = [run, ...exact.filter((t) => groupKey(t) === eps), ...elr.filter((t) => groupKey(t) === eps)];
    assertCompatible(same, ["fidelity", "reference"]);
  }
  const series: Series[] = [];
  runs.forEach((run, i) => {
    const color = COLORS[i % COLORS.length];
    const eps = epsilonOf(run);
    series.push({
      label: eps === null ? "run" : `data eps=${eps}`,
      kind: "points",
      x: run.columns["t_heis"],
      y: run.columns["re_f"],
      color,
      marker: "circle",
    });
    if (out.band) {
      const sig = 3 * Number(run.meta["sigma_total"] ?? 0);
      const ref = exact.find((t) => groupKey(t) === groupKey(run));
      if (sig > 0 && ref) {
        series.push({
          label: "",
          kind: "band",
          x: ref.columns["t"],
          y: ref.columns["f"],
          ylo: ref.columns["f"].map((v) => v - sig),
          yhi: ref.columns["f"].map((v) => v + sig),
          color,
        });
      }
    }
  });
  exact.forEach((t, i) => {
    series.push({
      label: `exact eps=${epsilonOf(t)}`,
      kind: "line",
      x: t.columns["t"],
      y: t.columns["f"],
      color: COLORS[i % COLORS.length],
    });
  });
  elr.forEach((t, i) => {
    series.push({
      label: `ELR eps=${epsilonOf(t)}`,
      kind: "line",
      x: t.columns["t"],
      y: t.columns["f"],
      color: COLORS[i % COLORS.length],
      dashed: true,
    });
  });
  return renderSvg({
    title: "Fidelity amplitude decay vs random-matrix predictions",
    xlabel: "t / t_H",
    ylabel: "Re f(t)",
    series,
    xrange: [0, 1.5],
  });
}

/** Recovery close-up: Re/Im points, reference curve, +-sigma band (fig5 style). */
export function figRevival(dataPath: string, rmtPath: string): string {
  const run = readTable(dataPath);
  const ref = readTable(rmtPath);
  assertCompatible([run, ref], [dataPath, rmtPath]);
  const sigma = Number(run.meta["sigma_intrinsic"] ?? run.meta["sigma_total"] ?? 0);
  const series: Series[] = [
    {
      label: "reference +- sigma_intrinsic",
      kind: "band",
      x: ref.columns["t"],
      y: ref.columns["f"],
      ylo: ref.columns["f"].map((v) => v - sigma),
      yhi: ref.columns["f"].map((v) => v + sigma),
      color: "#999999",
    },
    { label: "exact ensemble curve", kind: "line", x: ref.columns["t"], y: ref.columns["f"], color: "black" },
    {
      label: "Re f (chain)",
      kind: "points",
      x: run.columns["t_heis"],
      y: run.columns["re_f"],
      color: "#dc050c",
      marker: "triangle",
    },
    {
      label: "Im f (chain)",
      kind: "points",
      x: run.columns["t_heis"],
      y: run.columns["im_f"],
      color: "#1965b0",
      marker: "circle",
    },
  ];
  return renderSvg({
    title: "Fidelity recovery near the Heisenberg time",
    xlabel: "t / t_H",
    ylabel: "f(t)",
    series,
    xrange: [0.4, 1.3],
    yrange: [-0.01, 0.02],
  });
}

/** Orthogonal-class run vs ensemble oracle and ELR (fig6 style). */
export function figOrthogonal(dataPath: string, mcPath: string, elrPath?: string): string {
  const run = readTable(dataPath);
  const mc = readTable(mcPath);
  const tabs = [run, mc];
  const series: Series[] = [
    {
      label: "ensemble oracle +- se",
      kind: "band",
      x: mc.columns["t"],
      y: mc.columns["f"],
      ylo: mc.columns["f"].map((v, i) => v - mc.columns["stderr"][i]),
      yhi: mc.columns["f"].map((v, i) => v + mc.columns["stderr"][i]),
      color: "#4eb265",
    },
    { label: "ensemble oracle", kind: "line", x: mc.columns["t"], y: mc.columns["f"], color: "#4eb265" },
    {
      label: "Re f (chain)",
      kind: "points",
      x: run.columns["t_heis"],
      y: run.columns["re_f"],
      color: "#dc050c",
      marker: "triangle",
    },
  ];
  if (elrPath) {
    const elr = readTable(elrPath);
    tabs.push(elr);
    series.push({
      label: "ELR",
      kind: "line",
      x: elr.columns["t"],
      y: elr.columns["f"],
      color: "#1965b0",
      dashed: true,
    });
  }
  assertCompatible(tabs, [dataPath, mcPath, elrPath ?? ""]);
  return renderSvg({
    title: "Time-reversal-invariant chain vs orthogonal-class ensemble",
    xlabel: "t / t_H",
    ylabel: "Re f(t)",
    series,
    xrange: [0, 1.2],
  });
}
