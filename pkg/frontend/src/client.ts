/**
 * Child-process client for the matcher server.
 *
 * Spawns `python3 -m flowmatch.serve` and exchanges length-prefixed binary
 * frames over its stdin/stdout. The server answers requests strictly in
 * order, so a FIFO of pending promises is enough to pair responses with
 * callers; requests may be pipelined without awaiting each one.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import type { Readable, Writable } from "node:stream";

import {
  FrameDecoder,
  MatcherError,
  type MatchResult,
  ProtocolError,
  type QMcmfRequest,
  decodeResponse,
  encodeFrame,
  encodeHungarianRequest,
  encodeQMcmfRequest,
} from "./protocol.js";

export interface MatcherClientOptions {
  /** Python interpreter to run the server with; default "python3". */
  pythonBin?: string;
  /** Extra environment variables for the server process. */
  env?: Record<string, string>;
}

interface Pending {
  resolve: (result: MatchResult) => void;
  reject: (err: Error) => void;
}

export class MatcherClient {
  private readonly proc: ChildProcessByStdio<Writable, Readable, Readable>;
  private readonly decoder = new FrameDecoder();
  private readonly pending: Pending[] = [];
  private stderrTail = "";
  private exitCode: number | null = null;
  private closed = false;

  constructor(options: MatcherClientOptions = {}) {
    this.proc = spawn(options.pythonBin ?? "python3", ["-m", "flowmatch.serve"], {
      stdio: ["pipe", "pipe", "pipe"],
      env: options.env ? { ...process.env, ...options.env } : process.env,
    });
    this.proc.stdout.on("data", (chunk: Buffer) => this.onData(chunk));
    this.proc.stderr.on("data", (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString("utf8")).slice(-4096);
    });
    // a write racing the server's death raises EPIPE on the pipe itself;
    // the pending request is already rejected through the close handler
    this.proc.stdin.on("error", () => {});
    this.proc.on("error", (err) => {
      this.exitCode ??= -1;
      this.failAll(new ProtocolError(`server spawn failed: ${err.message}`));
    });
    this.proc.on("close", (code) => {
      this.exitCode = code;
      this.failAll(
        new ProtocolError(
          `server exited with code ${code} while requests were pending` +
            (this.stderrTail ? `; stderr: ${this.stderrTail.trim()}` : ""),
        ),
      );
    });
  }

  private onData(chunk: Buffer): void {
    let frames: Buffer[];
    try {
      frames = this.decoder.push(chunk);
    } catch (err) {
      this.failAll(err instanceof Error ? err : new ProtocolError(String(err)));
      this.proc.kill();
      return;
    }
    for (const frame of frames) {
      const waiter = this.pending.shift();
      if (!waiter) {
        // a response nobody asked for means the stream is out of sync
        this.failAll(new ProtocolError("received a response with no pending request"));
        this.proc.kill();
        return;
      }
      try {
        waiter.resolve(decodeResponse(frame));
      } catch (err) {
        waiter.reject(err instanceof Error ? err : new ProtocolError(String(err)));
      }
    }
  }

  private failAll(err: Error): void {
    while (this.pending.length > 0) {
      this.pending.shift()!.reject(err);
    }
  }

  private exchange(payload: Buffer): Promise<MatchResult> {
    if (this.closed) {
      return Promise.reject(new MatcherError("client is closed"));
    }
    if (this.exitCode !== null) {
      return Promise.reject(new ProtocolError(`server already exited with code ${this.exitCode}`));
    }
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.proc.stdin.write(encodeFrame(payload));
    });
  }

  /** Exhaustive assignment on a row-major cost matrix. */
  hungarian(nPreds: number, nTargets: number, cost: ArrayLike<number>): Promise<MatchResult> {
    let payload: Buffer;
    try {
      payload = encodeHungarianRequest(nPreds, nTargets, cost);
    } catch (err) {
      return Promise.reject(err);
    }
    return this.exchange(payload);
  }

  /** Quality-pruned flow matching; see QMcmfRequest for the field layout. */
  qMcmf(req: QMcmfRequest): Promise<MatchResult> {
    let payload: Buffer;
    try {
      payload = encodeQMcmfRequest(req);
    } catch (err) {
      return Promise.reject(err);
    }
    return this.exchange(payload);
  }

  /** End the session and wait for the server to exit; resolves to its exit code. */
  close(): Promise<number> {
    if (this.closed) {
      return Promise.resolve(this.exitCode ?? 0);
    }
    this.closed = true;
    if (this.exitCode !== null) {
      return Promise.resolve(this.exitCode);
    }
    return new Promise((resolve) => {
      this.proc.once("close", (code) => resolve(code ?? -1));
      this.proc.stdin.end();
    });
  }
}
