import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the integration test spawns the real job service and polls at
    // wall-clock intervals, so it needs more than the 5s default
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
