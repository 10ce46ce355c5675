/** Test harness: spawns the real session service and tears it down. */

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

export interface TestServer {
  baseUrl: string;
  dataDir: string;
  stop(): Promise<void>;
}

export const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

export async function startServer(): Promise<TestServer> {
  const port = 20000 + Math.floor(Math.random() * 20000);
  const dataDir = mkdtempSync(join(tmpdir(), "trialflow-ui-"));
  const child: ChildProcess = spawn(
    "python3",
    ["-m", "trialflow.cli", "serve", "--port", String(port), "--data", dataDir],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => (stderr += String(chunk)));

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    try {
      const response = await fetch(`${baseUrl}/transitions`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (child.exitCode !== null) {
      throw new Error(`server exited early (${child.exitCode}): ${stderr}`);
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error(`server did not come up: ${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 100));
  }

  return {
    baseUrl,
    dataDir,
    stop: () =>
      new Promise<void>((resolvePromise) => {
        child.once("exit", () => resolvePromise());
        child.kill("SIGTERM");
        setTimeout(() => child.kill("SIGKILL"), 3_000).unref();
      }),
  };
}

export function runCli(args: string[]): Promise<{ code: number; stdout: string; stderr: string }> {
  return new Promise((resolvePromise, reject) => {
    const child = spawn("python3", ["-m", "trialflow.cli", ...args], {
      cwd: REPO_ROOT,
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (chunk) => (stdout += String(chunk)));
    child.stderr.on("data", (chunk) => (stderr += String(chunk)));
    child.on("error", reject);
    child.on("exit", (code) => resolvePromise({ code: code ?? -1, stdout, stderr }));
  });
}
