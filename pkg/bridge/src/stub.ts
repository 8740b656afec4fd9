import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import type { GenerateRequest } from "./protocol.js";
import { FIXTURE_CAR_OBJ } from "./fixture.js";

/**
 * Stub backend: answers every request with copies of the fixture car.
 *
 * File content never varies, so a fixed seed trivially reproduces identical
 * output files. Paths are unique per request (monotonic counter + batch
 * index) so callers may hold several batches open at once.
 */
export class StubGenerator {
  readonly modelId: string;
  private readonly scratchDir: string;
  private counter = 0;

  constructor(scratchDir: string, modelId: string) {
    this.scratchDir = scratchDir;
    this.modelId = modelId;
    mkdirSync(scratchDir, { recursive: true });
  }

  async generate(request: GenerateRequest): Promise<string[]> {
    this.counter += 1;
    const paths: string[] = [];
    for (let i = 0; i < request.batch; i += 1) {
      const name = `stub_${String(this.counter).padStart(4, "0")}_${i}.obj`;
      const path = join(this.scratchDir, name);
      writeFileSync(path, FIXTURE_CAR_OBJ, "utf8");
      paths.push(path);
    }
    return paths;
  }

  close(): void {}
}
