/**
 * The six figure kinds rendered from pipeline CSVs.
 *
 * Trace files carry per-iteration columns t, x_1..x_N, y, grad_1..grad_N,
 * f_1..f_N, g; final_profiles.csv carries one row per run label; the
 * references file carries equilibrium rows (name, x1, x2, f1, f2) for the
 * market game, or the saddle/separation rows for the target-chasing game.
 * Every reference value on a figure comes from that CSV, never from code.
 */
import { CsvError, numericColumn, readCsv, stringColumn, Table, traceLabel } from "./csv";
import { Chart, Marker, PALETTE, RefLine, Series } from "./svg";

export type PlotKind =
  | "gradient"
  | "objective"
  | "strategy"
  | "final_position"
  | "coevolution"
  | "olsder_bars";

export interface PlotRequest {
  kind: PlotKind;
  inputs: string[];
  refsPath?: string;
  player: number;
}

interface References {
  byName: Map<string, { x1: number; x2: number; f1: number; f2: number }>;
}

function loadRefs(path?: string): References {
  const byName = new Map<string, { x1: number; x2: number; f1: number; f2: number }>();
  if (!path) return { byName };
  const table = readCsv(path);
  const names = stringColumn(table, "name");
  const x1 = numericColumn(table, "x1");
  const x2 = numericColumn(table, "x2");
  const f1 = numericColumn(table, "f1");
  const f2 = numericColumn(table, "f2");
  names.forEach((name, i) => {
    byName.set(name, { x1: x1[i], x2: x2[i], f1: f1[i], f2: f2[i] });
  });
  return { byName };
}

/** x_<p> column if present, else the follower column for the second player
 * of a single-leader trace. */
function playerActions(table: Table, player: number): number[] {
  const name = `x_${player}`;
  if (table.header.includes(name)) {
    return numericColumn(table, name);
  }
  if (player === 2 && table.header.includes("y")) {
    return numericColumn(table, "y");
  }
  throw new CsvError(`${table.path}: missing column '${name}'`);
}

function playerObjectives(table: Table, player: number): number[] {
  const name = `f_${player}`;
  if (table.header.includes(name)) {
    return numericColumn(table, name);
  }
  if (player === 2 && table.header.includes("g")) {
    return numericColumn(table, "g");
  }
  throw new CsvError(`${table.path}: missing column '${name}'`);
}

function traceSeries(
  inputs: string[],
  pick: (table: Table) => number[]
): Series[] {
  return inputs.map((path, i) => {
    const table = readCsv(path);
    return {
      label: traceLabel(path),
      x: numericColumn(table, "t"),
      y: pick(table),
      color: PALETTE[i % PALETTE.length],
    };
  });
}

function objectiveRefLines(refs: References, player: number): RefLine[] {
  const lines: RefLine[] = [];
  const colors = ["#444444", "#886600", "#006688", "#660066"];
  let i = 0;
  for (const name of ["NE", "SE", "CCE", "SWO"]) {
    const row = refs.byName.get(name);
    if (!row) continue;
    lines.push({
      label: name,
      value: player === 1 ? row.f1 : row.f2,
      kind: "horizontal",
      color: colors[i++ % colors.length],
    });
  }
  const separation = refs.byName.get("separation");
  if (separation) {
    lines.push({ label: "optimum", value: separation.f1, kind: "horizontal", color: "#444444" });
  }
  const saddle = refs.byName.get("saddle");
  if (saddle) {
    lines.push({ label: "saddle", value: saddle.f1, kind: "horizontal", color: "#888888" });
  }
  return lines;
}

export function renderPlot(request: PlotRequest): string {
  const refs = loadRefs(request.refsPath);
  const p = request.player;
  switch (request.kind) {
    case "gradient": {
      const series = traceSeries(request.inputs, (t) =>
        numericColumn(t, `grad_${p}`).map(Math.abs)
      );
      return new Chart(
        {
          title: `Gradient magnitude, player ${p}`,
          xLabel: "iteration",
          yLabel: `|grad_${p}|`,
          logY: true,
        },
        series
      ).render();
    }
    case "objective": {
      const series = traceSeries(request.inputs, (t) => playerObjectives(t, p));
      return new Chart(
        { title: `Objective of player ${p}`, xLabel: "iteration", yLabel: `f_${p}` },
        series,
        objectiveRefLines(refs, p)
      ).render();
    }
    case "strategy": {
      const series = traceSeries(request.inputs, (t) => playerActions(t, p));
      const lines: RefLine[] = [];
      for (const name of ["NE", "SE"]) {
        const row = refs.byName.get(name);
        if (row) {
          lines.push({
            label: name,
            value: p === 1 ? row.x1 : row.x2,
            kind: "horizontal",
            color: "#555555",
          });
        }
      }
      return new Chart(
        { title: `Strategy of player ${p}`, xLabel: "iteration", yLabel: `x_${p}` },
        series,
        lines
      ).render();
    }
    case "final_position": {
      const table = readCsv(request.inputs[0]);
      const labels = stringColumn(table, "label");
      const markers: Marker[] = [];
      const columns: [string, string][] = [
        ["x_1", "circle"],
        ["x_2", "square"],
        ["y", "circle"],
      ];
      columns.forEach(([column, shape], c) => {
        const values = numericColumn(table, column);
        values.forEach((v, i) => {
          if (!isFinite(v)) return;
          markers.push({
            label: column,
            x: i + 1,
            y: v,
            color: PALETTE[c % PALETTE.length],
            shape: shape as "circle" | "square",
          });
        });
      });
      const chart = new Chart(
        { title: "Final position of every player", xLabel: "run", yLabel: "action" },
        [],
        [],
        markers
      );
      chart.categoryLabels(labels, labels.map((_, i) => i + 1));
      return chart.render();
    }
    case "coevolution": {
      const series: Series[] = request.inputs.map((path, i) => {
        const table = readCsv(path);
        return {
          label: traceLabel(path),
          x: playerActions(table, 1),
          y: playerActions(table, 2),
          color: PALETTE[i % PALETTE.length],
        };
      });
      const lines: RefLine[] = [];
      const markers: Marker[] = [];
      const separation = refs.byName.get("separation");
      if (separation) {
        lines.push(
          { label: "x2 = x1 + d", value: separation.x1, kind: "diag", color: "#555555" },
          { label: "x2 = x1 - d", value: -separation.x2, kind: "diag", color: "#555555" },
          { label: "saddle x2 = x1", value: 0, kind: "diag", color: "#bbbbbb" }
        );
      }
      for (const name of ["NE", "SE", "CCE", "SWO"]) {
        const row = refs.byName.get(name);
        if (row) {
          markers.push({ label: name, x: row.x1, y: row.x2, color: "#333333", shape: "square" });
        }
      }
      return new Chart(
        { title: "Leader co-evolution", xLabel: "x_1", yLabel: "x_2" },
        series,
        lines,
        markers
      ).render();
    }
    case "olsder_bars": {
      const table = readCsv(request.inputs[0]);
      const labels = stringColumn(table, "label");
      const f1 = numericColumn(table, "f_1");
      const f2 = numericColumn(table, "f_2");
      const n = labels.length;
      const positions1 = labels.map((_, i) => i + 1);
      const positions2 = labels.map((_, i) => n + 1.5 + i);
      const span: Series = {
        label: "",
        x: [0.4, n + 1.5 + n - 0.4 + 0.6],
        y: [0, 0],
        color: "none",
      };
      const lines: RefLine[] = [];
      for (const name of ["NE", "SE", "CCE"]) {
        const row = refs.byName.get(name);
        if (!row) continue;
        lines.push({ label: `${name} f1`, value: row.f1, kind: "horizontal", color: "#444444" });
        lines.push({ label: `${name} f2`, value: row.f2, kind: "horizontal", color: "#999999" });
      }
      const chart = new Chart(
        { title: "Final objectives per run", xLabel: "player 1 | player 2", yLabel: "objective" },
        [span],
        lines
      );
      labels.forEach((label, i) => {
        chart.bar(positions1[i], 18, f1[i], PALETTE[i % PALETTE.length], `${label} f1`);
        chart.bar(positions2[i], 18, f2[i], PALETTE[i % PALETTE.length], `${label} f2`);
      });
      chart.categoryLabels([...labels, ...labels], [...positions1, ...positions2]);
      return chart.render();
    }
    default:
      throw new CsvError(`unknown plot kind '${request.kind}'`);
  }
}
