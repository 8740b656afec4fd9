#!/usr/bin/env node
import { parseArgs } from "node:util";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { serve } from "./server.js";

const USAGE = `usage: shape-bridge [--mode stub|model] [--scratch-dir DIR] [--model-cmd CMD] [--timeout SECONDS]

Serves the text-to-3D wire protocol on stdin/stdout: a {"ready": ...}
handshake line, then one JSON response per JSON request line.

  --mode         stub: answer every request with the fixture car (default)
                 model: delegate to the worker given by --model-cmd
  --scratch-dir  where OBJ files are written; defaults to $AEROPROMPT_SCRATCH
                 or a fresh temp directory
  --model-cmd    shell command for the model worker (model mode only)
  --timeout      per-generation deadline in seconds (default 300)
`;

function fail(message: string): never {
  process.stderr.write(`shape-bridge: ${message}\n`);
  process.stderr.write(USAGE);
  process.exit(1);
}

function main(): void {
  let values: Record<string, string | boolean | undefined>;
  try {
    ({ values } = parseArgs({
      options: {
        mode: { type: "string", default: "stub" },
        "scratch-dir": { type: "string" },
        "model-cmd": { type: "string" },
        timeout: { type: "string", default: "300" },
        help: { type: "boolean", default: false },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    fail(err instanceof Error ? err.message : String(err));
  }

  if (values.help) {
    process.stdout.write(USAGE);
    return;
  }

  const mode = values.mode as string;
  if (mode !== "stub" && mode !== "model") {
    fail(`--mode must be "stub" or "model", got "${mode}"`);
  }
  const timeoutS = Number(values.timeout);
  if (!Number.isFinite(timeoutS) || timeoutS <= 0) {
    fail(`--timeout must be a positive number of seconds, got "${values.timeout}"`);
  }

  const scratchDir =
    (values["scratch-dir"] as string | undefined) ??
    process.env.AEROPROMPT_SCRATCH ??
    mkdtempSync(join(tmpdir(), "shape-bridge-"));

  serve({
    mode,
    scratchDir,
    modelCmd: values["model-cmd"] as string | undefined,
    timeoutS,
  });
}

main();
