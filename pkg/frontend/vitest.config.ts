import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    setupFiles: ["test/setup.ts"],
    // tests spawn a real analytics service process; keep files sequential
    fileParallelism: false,
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
