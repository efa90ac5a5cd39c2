/**
 * CLI: `train` fits the restorer on a paired dataset and writes a checkpoint;
 * `infer` restores a sequence with a checkpoint and writes raw frames the
 * dataset toolkit's `eval` command can score.
 */

import { defaultConfig } from "./model.js";
import { infer } from "./infer.js";
import { defaultTrainOptions, loadCheckpoint, saveCheckpoint, train } from "./train.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad arguments near '${argv[i]}'`);
    }
    flags.set(argv[i].slice(2), argv[i + 1]);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (v === undefined) throw new Error(`missing required flag --${name}`);
  return v;
}

function cmdTrain(flags: Map<string, string>): void {
  const manifest = need(flags, "manifest");
  const out = need(flags, "checkpoint");
  const opts = {
    ...defaultTrainOptions,
    iterations: Number(flags.get("iters") ?? defaultTrainOptions.iterations),
    lr: Number(flags.get("lr") ?? defaultTrainOptions.lr),
    targetGainDb: Number(flags.get("target-gain") ?? 0),
    config: {
      ...defaultConfig,
      seed: Number(flags.get("seed") ?? defaultConfig.seed),
      baseWidth: Number(flags.get("width") ?? defaultConfig.baseWidth),
      segmentLength: Number(flags.get("segment") ?? defaultConfig.segmentLength),
      imageChannels: Number(flags.get("channels") ?? defaultConfig.imageChannels),
    },
  };
  const result = train(manifest, opts);
  saveCheckpoint(result.model, out);
  console.log(
    `trained ${result.losses.length} iterations: ` +
      `input ${result.inputPsnrDb.toFixed(2)} dB -> ${result.finalPsnrDb.toFixed(2)} dB`,
  );
}

function cmdInfer(flags: Map<string, string>): void {
  const model = loadCheckpoint(need(flags, "checkpoint"));
  const result = infer(need(flags, "manifest"), model, need(flags, "out"), flags.get("id"));
  console.log(`wrote restored sequence '${result.predictionId}' to ${result.outDir}`);
}

function main(): number {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseFlags(rest);
    if (command === "train") cmdTrain(flags);
    else if (command === "infer") cmdInfer(flags);
    else {
      console.error("usage: cli.js {train|infer} --flags ...");
      return 1;
    }
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

process.exit(main());
