import { defineConfig } from "vitest/config";

// server tests spawn real child processes; give them headroom
export default defineConfig({
  test: {
    testTimeout: 10_000,
    hookTimeout: 10_000,
  },
});
