/**
 * Minimal CSV reader for the experiment pipeline's artifacts.
 *
 * All pipeline files are plain comma-separated text with a mandatory header
 * row and no quoting, so a split-based parser is enough. Numeric accessors
 * fail loudly when a column is missing: a renamed column upstream should
 * break the plot run, not silently draw garbage.
 */
import { readFileSync } from "fs";

export interface Table {
  /** Source path, kept for error messages. */
  path: string;
  header: string[];
  rows: string[][];
}

export class CsvError extends Error {}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new CsvError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  if (rows.length === 0) {
    throw new CsvError(`${path}: no data rows`);
  }
  return { path, header, rows };
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(
      `${table.path}: missing column '${name}' (have: ${table.header.join(", ")})`
    );
  }
  return idx;
}

/** Numeric column; blank cells become NaN and are skipped by the plots. */
export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => (row[idx] === "" ? NaN : Number(row[idx])));
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => row[idx]);
}

/** Label of a trace file: trace_<label>.csv -> <label>. */
export function traceLabel(path: string): string {
  const base = path.split("/").pop() ?? path;
  const match = base.match(/^trace_(.+)\.csv$/);
  return match ? match[1] : base.replace(/\.csv$/, "");
}
