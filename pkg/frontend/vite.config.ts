import { defineConfig } from "vitest/config";

export default defineConfig({
  build: { target: "es2022" },
  test: {
    environment: "jsdom",
    globalSetup: "./tests/global-setup.ts",
    testTimeout: 60_000,
    hookTimeout: 120_000,
    // all test files share one spawned service process
    fileParallelism: false,
  },
});
