import { createInterface } from "node:readline";
import { errorResponse, okResponse, parseRequestLine, type GenerateRequest } from "./protocol.js";
import { StubGenerator } from "./stub.js";
import { ModelWorker } from "./model.js";
import { STUB_MODEL_ID } from "./fixture.js";

export interface ServeOptions {
  mode: "stub" | "model";
  scratchDir: string;
  /** shell command for the model worker; required in model mode */
  modelCmd?: string;
  /** per-generation deadline, seconds */
  timeoutS: number;
}

interface Backend {
  modelId: string;
  generate(request: GenerateRequest): Promise<string[]>;
  close(): void;
}

function emit(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

/**
 * Run the bridge until stdin closes. Exactly one response line per request
 * line; a line that cannot be parsed is answered with an error response (id
 * "unknown") and the process keeps serving. Requests run one at a time, in
 * arrival order, so responses never interleave.
 */
export function serve(options: ServeOptions): void {
  let backend: Backend;
  if (options.mode === "stub") {
    backend = new StubGenerator(options.scratchDir, STUB_MODEL_ID);
  } else {
    if (!options.modelCmd) {
      emit({ ready: false, message: "model mode needs --model-cmd" });
      process.exitCode = 1;
      return;
    }
    backend = new ModelWorker(options.modelCmd, options.scratchDir, options.timeoutS * 1000);
  }

  emit({ ready: true, model: backend.modelId });

  const rl = createInterface({ input: process.stdin, terminal: false });
  let chain: Promise<void> = Promise.resolve();

  const handleLine = async (line: string): Promise<void> => {
    if (line.trim().length === 0) return;
    const parsed = parseRequestLine(line);
    if (parsed.kind === "invalid") {
      emit(errorResponse(parsed.id, parsed.message));
      return;
    }
    try {
      const paths = await backend.generate(parsed.request);
      emit(okResponse(parsed.request.id, paths));
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      emit(errorResponse(parsed.request.id, message));
    }
  };

  rl.on("line", (line) => {
    chain = chain.then(() => handleLine(line));
  });
  rl.on("close", () => {
    void chain.then(() => {
      backend.close();
      process.exitCode = 0;
    });
  });
}
