import { spawn, type ChildProcess } from "node:child_process";
import { mkdirSync } from "node:fs";
import { createInterface } from "node:readline";
import type { GenerateRequest } from "./protocol.js";

/**
 * Model backend: delegates generation to a long-running worker command.
 *
 * The worker contract is deliberately smaller than the bridge protocol so a
 * model author only has to wrap their sampler in a few lines. One JSON line
 * per job on the worker's stdin:
 *
 *   {"prompt": string, "seed": int, "batch": int, "out_dir": string}
 *
 * answered by one JSON line on its stdout:
 *
 *   {"mesh_paths": [string]}     on success
 *   {"error": string}            on failure
 *
 * The bridge owns ids, request validation, framing, and timeouts; the worker
 * only turns prompts into OBJ files under out_dir. Non-JSON stdout lines are
 * treated as log noise and skipped. A worker that blows its deadline is
 * killed (its stream state is unknown); later requests then fail fast.
 */

// timeout sentinel; null marks worker exit
const TIMED_OUT = Symbol("timed-out");

export class ModelWorker {
  readonly modelId: string;
  private readonly scratchDir: string;
  private readonly timeoutMs: number;
  private readonly child: ChildProcess;
  private readonly pending: string[] = [];
  private readonly waiters: Array<(line: string | null) => void> = [];
  private exited = false;

  constructor(command: string, scratchDir: string, timeoutMs: number) {
    this.modelId = `model:${command}`;
    this.scratchDir = scratchDir;
    this.timeoutMs = timeoutMs;
    mkdirSync(scratchDir, { recursive: true });

    this.child = spawn(command, { shell: true, stdio: ["pipe", "pipe", "inherit"] });
    // a request may race the worker's death; EPIPE on write must not crash
    this.child.stdin!.on("error", () => {});
    const rl = createInterface({ input: this.child.stdout! });
    rl.on("line", (line) => {
      const waiter = this.waiters.shift();
      if (waiter) waiter(line);
      else this.pending.push(line);
    });
    this.child.on("exit", () => {
      this.exited = true;
      while (this.waiters.length > 0) this.waiters.shift()!(null);
    });
    this.child.on("error", () => {
      this.exited = true;
      while (this.waiters.length > 0) this.waiters.shift()!(null);
    });
  }

  get alive(): boolean {
    return !this.exited;
  }

  private nextLine(deadline: number): Promise<string | null | typeof TIMED_OUT> {
    if (this.pending.length > 0) return Promise.resolve(this.pending.shift()!);
    if (this.exited) return Promise.resolve(null);
    const remaining = deadline - Date.now();
    if (remaining <= 0) return Promise.resolve(TIMED_OUT);
    return new Promise((resolve) => {
      const waiter = (line: string | null) => {
        clearTimeout(timer);
        resolve(line);
      };
      const timer = setTimeout(() => {
        const idx = this.waiters.indexOf(waiter);
        if (idx >= 0) this.waiters.splice(idx, 1);
        resolve(TIMED_OUT);
      }, remaining);
      this.waiters.push(waiter);
    });
  }

  async generate(request: GenerateRequest): Promise<string[]> {
    if (this.exited) throw new Error("model worker is not running");
    const job = JSON.stringify({
      prompt: request.prompt,
      seed: request.seed,
      batch: request.batch,
      out_dir: this.scratchDir,
    });
    this.child.stdin!.write(job + "\n");

    const deadline = Date.now() + this.timeoutMs;
    while (true) {
      const line = await this.nextLine(deadline);
      if (line === TIMED_OUT) {
        this.child.kill();
        throw new Error(`model worker timed out after ${this.timeoutMs / 1000}s`);
      }
      if (line === null) throw new Error("model worker exited before answering");
      let reply: unknown;
      try {
        reply = JSON.parse(line);
      } catch {
        continue; // log noise
      }
      if (typeof reply !== "object" || reply === null || Array.isArray(reply)) continue;
      const obj = reply as Record<string, unknown>;
      if (typeof obj.error === "string") throw new Error(obj.error);
      const paths = obj.mesh_paths;
      if (!Array.isArray(paths) || paths.length === 0 || !paths.every((p) => typeof p === "string")) {
        throw new Error("model worker reply carried no mesh_paths");
      }
      return paths as string[];
    }
  }

  close(): void {
    if (!this.exited) {
      this.child.stdin?.end();
      this.child.kill();
    }
  }
}
