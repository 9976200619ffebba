#!/usr/bin/env node
/**
 * retrobleu-prep: tokenize raw route files into retrobleu interchange JSON.
 *
 *   retrobleu-prep --in raw/ --out routes/ [--radius 1]
 *
 * Reads every *.json file of the input directory, canonicalizes molecule
 * SMILES, extracts templates from atom-mapped reaction SMILES at the
 * given radius, and writes one output file per input file plus a
 * prep.manifest.json recording the toolkit settings.  Routes that fail
 * to tokenize are skipped and counted.
 */

import { readdirSync, readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { createRequire } from "node:module";
import { basename, join } from "node:path";
import process from "node:process";

import { renderRouteFile, tokenizeRouteFile, type TokenizeSummary } from "./tokenize.js";

interface CliArgs {
  inDir: string;
  outDir: string;
  radius: number;
}

function parseArgs(argv: string[]): CliArgs {
  let inDir: string | undefined;
  let outDir: string | undefined;
  let radius = 1;
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--in") {
      inDir = argv[++i];
    } else if (arg === "--out") {
      outDir = argv[++i];
    } else if (arg === "--radius") {
      radius = Number(argv[++i]);
    } else if (arg === "--help" || arg === "-h") {
      console.log("usage: retrobleu-prep --in RAW_DIR --out OUT_DIR [--radius 0|1|2]");
      process.exit(0);
    } else {
      throw new Error(`unknown argument: ${arg}`);
    }
  }
  if (!inDir || !outDir) {
    throw new Error("both --in and --out are required");
  }
  if (!Number.isInteger(radius) || radius < 0 || radius > 2) {
    throw new Error(`--radius must be 0, 1 or 2, got ${radius}`);
  }
  return { inDir, outDir, radius };
}

function openchemVersion(): string {
  try {
    const require = createRequire(import.meta.url);
    return (require("openchem/package.json") as { version: string }).version;
  } catch {
    return "unknown";
  }
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }

  let files: string[];
  try {
    files = readdirSync(args.inDir)
      .filter((name) => name.endsWith(".json") && !name.endsWith(".manifest.json"))
      .sort();
  } catch (error) {
    console.error(`i/o error: ${(error as Error).message}`);
    return 2;
  }
  if (files.length === 0) {
    console.error(`error: no .json route files in ${args.inDir}`);
    return 1;
  }

  try {
    mkdirSync(args.outDir, { recursive: true });
  } catch (error) {
    console.error(`i/o error: ${(error as Error).message}`);
    return 2;
  }

  const totals: TokenizeSummary = {
    routesRead: 0,
    routesWritten: 0,
    routesSkipped: 0,
    failures: [],
  };
  const written: string[] = [];
  for (const name of files) {
    const sourcePath = join(args.inDir, name);
    let doc: unknown;
    try {
      doc = JSON.parse(readFileSync(sourcePath, "utf-8"));
    } catch (error) {
      totals.failures.push(`${name}: ${(error as Error).message}`);
      continue;
    }
    const { routes, summary } = tokenizeRouteFile(doc, args.radius, basename(name, ".json"));
    totals.routesRead += summary.routesRead;
    totals.routesWritten += summary.routesWritten;
    totals.routesSkipped += summary.routesSkipped;
    totals.failures.push(...summary.failures);
    if (routes.length > 0) {
      const outPath = join(args.outDir, name);
      writeFileSync(outPath, renderRouteFile(routes, Array.isArray(doc)), "utf-8");
      written.push(name);
    }
  }

  const manifest = {
    command: "retrobleu-prep",
    toolkit: { name: "openchem", version: openchemVersion() },
    template_radius: args.radius,
    input_dir: args.inDir,
    files_written: written,
    routes_read: totals.routesRead,
    routes_written: totals.routesWritten,
    routes_skipped: totals.routesSkipped,
  };
  writeFileSync(
    join(args.outDir, "prep.manifest.json"),
    `${JSON.stringify(manifest, null, 2)}\n`,
    "utf-8",
  );

  for (const failure of totals.failures) {
    console.error(`warning: skipped ${failure}`);
  }
  console.log(
    `tokenized ${totals.routesWritten}/${totals.routesRead} routes ` +
      `(${totals.routesSkipped} skipped) into ${args.outDir}`,
  );
  return 0;
}

const entryHref = process.argv[1] ? new URL(`file://${process.argv[1]}`).href : "";
if (import.meta.url === entryHref) {
  process.exit(main(process.argv.slice(2)));
}
