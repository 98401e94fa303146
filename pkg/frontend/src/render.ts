/**
 * Figure renderer CLI.
 *
 * Usage:
 *   render --kind <gradient|objective|strategy|final_position|coevolution|olsder_bars>
 *          --in <csv[,csv...]> [--refs <references.csv>] --out <figure.svg>
 *          [--player <1|2>]
 *
 * Exits nonzero with a message on a missing file, missing column, or an
 * unknown kind.
 */
import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import { CsvError } from "./csv";
import { PlotKind, renderPlot } from "./plots";

const KINDS: PlotKind[] = [
  "gradient",
  "objective",
  "strategy",
  "final_position",
  "coevolution",
  "olsder_bars",
];

interface Args {
  kind: PlotKind;
  inputs: string[];
  refs?: string;
  out: string;
  player: number;
}

function parseArgs(argv: string[]): Args {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      throw new CsvError(`malformed arguments near '${flag}'`);
    }
    values.set(flag.slice(2), argv[i + 1]);
  }
  const kind = values.get("kind");
  if (!kind || !KINDS.includes(kind as PlotKind)) {
    throw new CsvError(`--kind must be one of: ${KINDS.join(", ")}`);
  }
  const input = values.get("in");
  if (!input) throw new CsvError("--in is required (comma-separated CSV paths)");
  const out = values.get("out");
  if (!out) throw new CsvError("--out is required");
  const player = Number(values.get("player") ?? "1");
  if (player !== 1 && player !== 2) throw new CsvError("--player must be 1 or 2");
  return {
    kind: kind as PlotKind,
    inputs: input.split(",").filter((p) => p.length > 0),
    refs: values.get("refs"),
    out,
    player,
  };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const svg = renderPlot({
      kind: args.kind,
      inputs: args.inputs,
      refsPath: args.refs,
      player: args.player,
    });
    mkdirSync(dirname(args.out), { recursive: true });
    writeFileSync(args.out, svg + "\n");
    return 0;
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
