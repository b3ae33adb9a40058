/** Shared test plumbing: schema validation, live gateway, message waiting. */

import { spawn, ChildProcess } from "node:child_process";
import { createServer } from "node:net";
import { readFileSync } from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import Ajv from "ajv";
import WebSocket from "ws";

import { GatewayClient } from "../src/client";
import { ViewModel } from "../src/model";
import type { Envelope } from "../src/types";

const here = path.dirname(fileURLToPath(import.meta.url));
export const repoRoot = path.resolve(here, "..", "..");

const schema = JSON.parse(readFileSync(
  path.join(repoRoot, "schema", "protocol.schema.json"), "utf8"));

const ajv = new Ajv({ strict: false });
const compiled = ajv.compile(schema);

export function assertSchemaValid(message: Envelope): void {
  const ok = compiled(message) as boolean;
  if (!ok) {
    throw new Error(`schema violation for ${message.type}: ` +
      JSON.stringify(compiled.errors));
  }
}

export function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

export interface LiveGateway {
  port: number;
  proc: ChildProcess;
  stop(): void;
}

export async function startGateway(scene: string): Promise<LiveGateway> {
  const port = await freePort();
  const proc = spawn("python3", [
    "-m", "affordkit.gateway.cli", "serve",
    "--scene", path.join(repoRoot, "scenes", scene),
    "--port", String(port),
  ], { cwd: repoRoot, stdio: ["ignore", "pipe", "pipe"] });

  let log = "";
  proc.stdout?.on("data", (d: Buffer) => (log += d));
  proc.stderr?.on("data", (d: Buffer) => (log += d));

  const deadline = Date.now() + 20000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) {
      throw new Error(`gateway exited: ${log}`);
    }
    try {
      await fetch(`http://127.0.0.1:${port}/healthz`);
      return { port, proc, stop: () => proc.kill() };
    } catch {
      await sleep(100);
    }
  }
  proc.kill();
  throw new Error(`gateway never came up: ${log}`);
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export interface TestHarness {
  client: GatewayClient;
  model: ViewModel;
  received: Envelope[];
  waitFor(predicate: (m: Envelope) => boolean, timeoutMs?: number):
    Promise<Envelope>;
  close(): void;
}

export async function connect(port: number): Promise<TestHarness> {
  const socket = new WebSocket(`ws://127.0.0.1:${port}/ws`);
  await new Promise<void>((resolve, reject) => {
    socket.onopen = () => resolve();
    socket.onerror = (e: unknown) => reject(e);
  });
  const model = new ViewModel();
  const client = new GatewayClient(socket as never, model);
  const received: Envelope[] = [];
  const waiters: { predicate: (m: Envelope) => boolean;
                   resolve: (m: Envelope) => void }[] = [];
  client.onMessage((message) => {
    received.push(message);
    for (let i = waiters.length - 1; i >= 0; i--) {
      if (waiters[i].predicate(message)) {
        waiters[i].resolve(message);
        waiters.splice(i, 1);
      }
    }
  });
  return {
    client,
    model,
    received,
    waitFor(predicate, timeoutMs = 15000) {
      const hit = received.find(predicate);
      if (hit) return Promise.resolve(hit);
      return new Promise((resolve, reject) => {
        const timer = setTimeout(
          () => reject(new Error("timed out waiting for message")), timeoutMs);
        waiters.push({
          predicate,
          resolve: (m) => {
            clearTimeout(timer);
            resolve(m);
          },
        });
      });
    },
    close: () => socket.close(),
  };
}

/** Recording 2D context standing in for a canvas. */
export class RecordingCtx {
  fillStyle: string = "";
  strokeStyle: string = "";
  lineWidth = 1;
  font = "";
  globalAlpha = 1;
  ops: { op: string; style: string; args: number[] }[] = [];

  save(): void {}
  restore(): void {}
  translate(_x: number, _y: number): void {}
  rotate(_a: number): void {}
  scale(_x: number, _y: number): void {}
  fillRect(...args: number[]): void {
    this.ops.push({ op: "fillRect", style: String(this.fillStyle), args });
  }
  strokeRect(...args: number[]): void {
    this.ops.push({ op: "strokeRect", style: String(this.strokeStyle), args });
  }
  beginPath(): void {}
  arc(...args: number[]): void {
    this.ops.push({ op: "arc", style: String(this.fillStyle), args });
  }
  moveTo(): void {}
  lineTo(): void {}
  closePath(): void {}
  fill(): void {}
  stroke(): void {}
  fillText(text: string, x: number, y: number): void {
    this.ops.push({ op: `text:${text}`, style: String(this.fillStyle),
                    args: [x, y] });
  }
  clearRect(...args: number[]): void {
    this.ops.push({ op: "clearRect", style: "", args });
  }

  reset(): void {
    this.ops = [];
  }

  drewWithStyle(style: string): boolean {
    return this.ops.some((o) => o.style === style);
  }

  drewText(prefix: string): boolean {
    return this.ops.some((o) => o.op.startsWith(`text:${prefix}`));
  }
}
