import { defineConfig } from "vitest/config";

export default defineConfig({
  // assets live under the service's /static/ route; index.html is served at /
  base: "/static/",
  build: { outDir: "dist" },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
