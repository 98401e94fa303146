/**
 * Hand-rolled SVG chart primitives: line charts, scatter marks, grouped
 * bars, reference lines, axes and legends. No timestamps or any other
 * run-varying state are embedded, so equal inputs give byte-equal files.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dash?: string;
}

export interface RefLine {
  label: string;
  /** Horizontal line at y = value, or diagonal y = x + value for kind "diag". */
  value: number;
  kind: "horizontal" | "diag";
  color: string;
}

export interface Marker {
  label: string;
  x: number;
  y: number;
  color: string;
  shape: "circle" | "square";
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { top: 36, right: 24, bottom: 56, left: 84 };

interface Scale {
  (v: number): number;
}

function linearScale(domainMin: number, domainMax: number, rangeMin: number, rangeMax: number): Scale {
  const span = domainMax - domainMin || 1;
  return (v: number) => rangeMin + ((v - domainMin) / span) * (rangeMax - rangeMin);
}

function niceTicks(min: number, max: number, count = 6): number[] {
  const span = max - min || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = step * factor;
  const start = Math.ceil(min / nice) * nice;
  const ticks: number[] = [];
  for (let v = start; v <= max + 1e-12; v += nice) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function fmt(v: number): string {
  if (!isFinite(v)) return "";
  if (v !== 0 && (Math.abs(v) >= 1e5 || Math.abs(v) < 1e-3)) {
    return v.toExponential(1);
  }
  return Number(v.toPrecision(6)).toString();
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY?: boolean;
}

/** Shared frame: computes scales over every series/marker/ref, draws axes. */
export class Chart {
  private parts: string[] = [];
  private sx: Scale;
  private sy: Scale;
  private xMin = Infinity;
  private xMax = -Infinity;
  private yMin = Infinity;
  private yMax = -Infinity;
  private legend: { label: string; color: string; dash?: string }[] = [];

  constructor(
    private options: ChartOptions,
    series: Series[],
    refs: RefLine[] = [],
    markers: Marker[] = []
  ) {
    const ys = (v: number) => (options.logY ? Math.log10(Math.max(Math.abs(v), 1e-16)) : v);
    for (const s of series) {
      for (let i = 0; i < s.x.length; i++) {
        if (!isFinite(s.x[i]) || !isFinite(s.y[i])) continue;
        this.xMin = Math.min(this.xMin, s.x[i]);
        this.xMax = Math.max(this.xMax, s.x[i]);
        this.yMin = Math.min(this.yMin, ys(s.y[i]));
        this.yMax = Math.max(this.yMax, ys(s.y[i]));
      }
    }
    for (const m of markers) {
      this.xMin = Math.min(this.xMin, m.x);
      this.xMax = Math.max(this.xMax, m.x);
      this.yMin = Math.min(this.yMin, ys(m.y));
      this.yMax = Math.max(this.yMax, ys(m.y));
    }
    for (const r of refs) {
      if (r.kind === "horizontal") {
        this.yMin = Math.min(this.yMin, ys(r.value));
        this.yMax = Math.max(this.yMax, ys(r.value));
      }
    }
    if (!isFinite(this.xMin)) {
      this.xMin = 0;
      this.xMax = 1;
    }
    if (!isFinite(this.yMin)) {
      this.yMin = 0;
      this.yMax = 1;
    }
    const padY = 0.06 * (this.yMax - this.yMin || 1);
    this.yMin -= padY;
    this.yMax += padY;
    this.sx = linearScale(this.xMin, this.xMax, MARGIN.left, WIDTH - MARGIN.right);
    this.sy = linearScale(this.yMin, this.yMax, HEIGHT - MARGIN.bottom, MARGIN.top);

    this.axes();
    for (const r of refs) this.refLine(r);
    for (const s of series) this.polyline(s);
    for (const m of markers) this.marker(m);
  }

  private toY(v: number): number {
    return this.options.logY ? Math.log10(Math.max(Math.abs(v), 1e-16)) : v;
  }

  private axes(): void {
    const { title, xLabel, yLabel, logY } = this.options;
    const bottom = HEIGHT - MARGIN.bottom;
    this.parts.push(
      `<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="15" font-family="sans-serif">${escapeXml(title)}</text>`,
      `<line x1="${MARGIN.left}" y1="${bottom}" x2="${WIDTH - MARGIN.right}" y2="${bottom}" stroke="black"/>`,
      `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${bottom}" stroke="black"/>`
    );
    for (const t of niceTicks(this.xMin, this.xMax)) {
      const px = this.sx(t);
      this.parts.push(
        `<line x1="${px}" y1="${bottom}" x2="${px}" y2="${bottom + 5}" stroke="black"/>`,
        `<text x="${px}" y="${bottom + 20}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmt(t)}</text>`
      );
    }
    for (const t of niceTicks(this.yMin, this.yMax)) {
      const py = this.sy(t);
      const shown = logY ? `1e${fmt(t)}` : fmt(t);
      this.parts.push(
        `<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="black"/>`,
        `<text x="${MARGIN.left - 8}" y="${py + 4}" text-anchor="end" font-size="11" font-family="sans-serif">${shown}</text>`
      );
    }
    this.parts.push(
      `<text x="${(MARGIN.left + WIDTH - MARGIN.right) / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="13" font-family="sans-serif">${escapeXml(xLabel)}</text>`,
      `<text x="22" y="${(MARGIN.top + bottom) / 2}" text-anchor="middle" font-size="13" font-family="sans-serif" transform="rotate(-90 22 ${(MARGIN.top + bottom) / 2})">${escapeXml(yLabel)}</text>`
    );
  }

  private polyline(s: Series): void {
    const points: string[] = [];
    for (let i = 0; i < s.x.length; i++) {
      if (!isFinite(s.x[i]) || !isFinite(s.y[i])) continue;
      points.push(`${this.sx(s.x[i]).toFixed(2)},${this.sy(this.toY(s.y[i])).toFixed(2)}`);
    }
    const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
    this.parts.push(
      `<polyline data-label="${escapeXml(s.label)}" fill="none" stroke="${s.color}" stroke-width="1.6"${dash} points="${points.join(" ")}"/>`
    );
    this.legend.push({ label: s.label, color: s.color, dash: s.dash });
  }

  private refLine(r: RefLine): void {
    if (r.kind === "horizontal") {
      const py = this.sy(this.toY(r.value));
      this.parts.push(
        `<line data-ref="${escapeXml(r.label)}" x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" stroke="${r.color}" stroke-dasharray="6 4"/>`,
        `<text x="${WIDTH - MARGIN.right - 4}" y="${py - 4}" text-anchor="end" font-size="11" fill="${r.color}" font-family="sans-serif">${escapeXml(r.label)}</text>`
      );
    } else {
      // y = x + value across the visible x-range.
      const p1x = this.xMin;
      const p2x = this.xMax;
      this.parts.push(
        `<line data-ref="${escapeXml(r.label)}" x1="${this.sx(p1x)}" y1="${this.sy(this.toY(p1x + r.value))}" x2="${this.sx(p2x)}" y2="${this.sy(this.toY(p2x + r.value))}" stroke="${r.color}" stroke-dasharray="6 4"/>`
      );
    }
  }

  private marker(m: Marker): void {
    const px = this.sx(m.x);
    const py = this.sy(this.toY(m.y));
    if (m.shape === "square") {
      this.parts.push(
        `<rect data-label="${escapeXml(m.label)}" x="${px - 4}" y="${py - 4}" width="8" height="8" fill="${m.color}"/>`
      );
    } else {
      this.parts.push(
        `<circle data-label="${escapeXml(m.label)}" cx="${px}" cy="${py}" r="4.5" fill="${m.color}"/>`
      );
    }
    if (!this.legend.some((e) => e.label === m.label)) {
      this.legend.push({ label: m.label, color: m.color });
    }
  }

  /** Custom x tick labels for categorical axes (bars, final positions). */
  categoryLabels(labels: string[], positions: number[]): void {
    const bottom = HEIGHT - MARGIN.bottom;
    labels.forEach((label, i) => {
      const px = this.sx(positions[i]);
      this.parts.push(
        `<text x="${px}" y="${bottom + 34}" text-anchor="middle" font-size="11" font-family="sans-serif" transform="rotate(-20 ${px} ${bottom + 34})">${escapeXml(label)}</text>`
      );
    });
  }

  bar(x: number, width: number, value: number, color: string, label: string): void {
    const zero = this.sy(Math.max(this.yMin, Math.min(0, this.yMax)));
    const py = this.sy(this.toY(value));
    const top = Math.min(py, zero);
    const height = Math.abs(zero - py);
    this.parts.push(
      `<rect data-label="${escapeXml(label)}" x="${this.sx(x) - width / 2}" y="${top}" width="${width}" height="${height}" fill="${color}" opacity="0.85"/>`
    );
  }

  render(): string {
    const legendParts: string[] = [];
    this.legend.forEach((entry, i) => {
      const y = MARGIN.top + 8 + 16 * i;
      const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
      legendParts.push(
        `<line x1="${WIDTH - MARGIN.right - 150}" y1="${y}" x2="${WIDTH - MARGIN.right - 126}" y2="${y}" stroke="${entry.color}" stroke-width="2"${dash}/>`,
        `<text x="${WIDTH - MARGIN.right - 120}" y="${y + 4}" font-size="11" font-family="sans-serif">${escapeXml(entry.label)}</text>`
      );
    });
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      ...this.parts,
      ...legendParts,
      "</svg>",
    ].join("\n");
  }
}
