/**
 * Binary wire format shared with the matcher server.
 *
 * Every frame is a little-endian u32 payload length followed by the payload.
 * Requests start with an op byte (1 = hungarian, 2 = quality-pruned flow),
 * then u32 nPreds, u32 nTargets, and the row-major f64 cost buffer; op 2
 * appends the f64 quality buffer, one origin tag byte per target (0 = old,
 * 1 = new), and f64 alpha/beta cutoffs. Responses start with a status byte:
 * 0 carries u32 nPairs, u32 pred indices, u32 target indices, and the f64
 * total cost; 1 carries a u32-length-prefixed utf-8 message.
 */

export const OP_HUNGARIAN = 1;
export const OP_QMCMF = 2;

const STATUS_OK = 0;
const STATUS_ERROR = 1;

/** Guards against a garbage length prefix; must match the server's limit. */
export const MAX_FRAME = 1 << 26;

/** Base class for everything this client throws on purpose. */
export class MatcherError extends Error {
  constructor(message: string) {
    super(message);
    this.name = new.target.name;
  }
}

/** A failure the server reported in a status-1 frame. */
export class RemoteMatcherError extends MatcherError {}

/** A byte stream that cannot be decoded, or a server that died mid-exchange. */
export class ProtocolError extends MatcherError {}

export interface MatchResult {
  predIndices: Uint32Array;
  targetIndices: Uint32Array;
  totalCost: number;
}

export interface QMcmfRequest {
  nPreds: number;
  nTargets: number;
  /** Row-major cost matrix, length nPreds * nTargets. */
  cost: ArrayLike<number>;
  /** Row-major pairwise quality (IoU) matrix, same shape as cost. */
  quality: ArrayLike<number>;
  /** One tag per target: 0 = old origin, 1 = new origin. */
  origins: ArrayLike<number>;
  /** Quality cutoff for old-origin targets; default 0.7. */
  alpha?: number;
  /** Quality cutoff for new-origin targets; default 0.5. */
  beta?: number;
}

function checkShape(nPreds: number, nTargets: number): void {
  for (const [name, v] of [
    ["nPreds", nPreds],
    ["nTargets", nTargets],
  ] as const) {
    if (!Number.isInteger(v) || v < 0 || v > 0xffffffff) {
      throw new MatcherError(`${name} must be a u32, got ${v}`);
    }
  }
}

function checkBuffer(name: string, buf: ArrayLike<number>, want: number): void {
  if (buf.length !== want) {
    throw new MatcherError(`${name} buffer has length ${buf.length}, expected ${want}`);
  }
}

class Writer {
  private readonly buf: Buffer;
  private off = 0;

  constructor(size: number) {
    this.buf = Buffer.allocUnsafe(size);
  }

  u8(v: number): void {
    this.off = this.buf.writeUInt8(v, this.off);
  }

  u32(v: number): void {
    this.off = this.buf.writeUInt32LE(v, this.off);
  }

  f64(v: number): void {
    this.off = this.buf.writeDoubleLE(v, this.off);
  }

  f64Array(values: ArrayLike<number>): void {
    for (let i = 0; i < values.length; i++) {
      this.f64(values[i]);
    }
  }

  done(): Buffer {
    if (this.off !== this.buf.length) {
      throw new ProtocolError(`encoder bug: wrote ${this.off} of ${this.buf.length} bytes`);
    }
    return this.buf;
  }
}

class Reader {
  private off = 0;

  constructor(private readonly buf: Buffer) {}

  private need(n: number, what: string): void {
    if (this.off + n > this.buf.length) {
      throw new ProtocolError(
        `payload too short reading ${what}: need ${n} bytes at offset ${this.off} of ${this.buf.length}`,
      );
    }
  }

  u8(what: string): number {
    this.need(1, what);
    return this.buf.readUInt8(this.off++);
  }

  u32(what: string): number {
    this.need(4, what);
    const v = this.buf.readUInt32LE(this.off);
    this.off += 4;
    return v;
  }

  f64(what: string): number {
    this.need(8, what);
    const v = this.buf.readDoubleLE(this.off);
    this.off += 8;
    return v;
  }

  u32Array(count: number, what: string): Uint32Array {
    const out = new Uint32Array(count);
    for (let i = 0; i < count; i++) {
      out[i] = this.u32(what);
    }
    return out;
  }

  utf8(length: number, what: string): string {
    this.need(length, what);
    const s = this.buf.toString("utf8", this.off, this.off + length);
    this.off += length;
    return s;
  }

  finish(): void {
    if (this.off !== this.buf.length) {
      throw new ProtocolError(`payload has ${this.buf.length - this.off} trailing bytes`);
    }
  }
}

export function encodeHungarianRequest(
  nPreds: number,
  nTargets: number,
  cost: ArrayLike<number>,
): Buffer {
  checkShape(nPreds, nTargets);
  checkBuffer("cost", cost, nPreds * nTargets);
  const w = new Writer(1 + 8 + 8 * cost.length);
  w.u8(OP_HUNGARIAN);
  w.u32(nPreds);
  w.u32(nTargets);
  w.f64Array(cost);
  return w.done();
}

export function encodeQMcmfRequest(req: QMcmfRequest): Buffer {
  const { nPreds, nTargets, cost, quality, origins } = req;
  checkShape(nPreds, nTargets);
  checkBuffer("cost", cost, nPreds * nTargets);
  checkBuffer("quality", quality, nPreds * nTargets);
  checkBuffer("origins", origins, nTargets);
  const w = new Writer(1 + 8 + 16 * cost.length + origins.length + 16);
  w.u8(OP_QMCMF);
  w.u32(nPreds);
  w.u32(nTargets);
  w.f64Array(cost);
  w.f64Array(quality);
  for (let i = 0; i < origins.length; i++) {
    const tag = origins[i];
    if (tag !== 0 && tag !== 1) {
      throw new MatcherError(`origins[${i}] must be 0 (old) or 1 (new), got ${tag}`);
    }
    w.u8(tag);
  }
  w.f64(req.alpha ?? 0.7);
  w.f64(req.beta ?? 0.5);
  return w.done();
}

/**
 * Decode a response payload, throwing RemoteMatcherError for status-1 frames.
 */
export function decodeResponse(payload: Buffer): MatchResult {
  const r = new Reader(payload);
  const status = r.u8("status");
  if (status === STATUS_ERROR) {
    const length = r.u32("message length");
    const message = r.utf8(length, "message");
    r.finish();
    throw new RemoteMatcherError(message);
  }
  if (status !== STATUS_OK) {
    throw new ProtocolError(`unknown response status ${status}`);
  }
  const nPairs = r.u32("pair count");
  const predIndices = r.u32Array(nPairs, "pred index");
  const targetIndices = r.u32Array(nPairs, "target index");
  const totalCost = r.f64("total cost");
  r.finish();
  return { predIndices, targetIndices, totalCost };
}

/**
 * Incremental frame splitter for a length-prefixed byte stream.
 *
 * Feed it chunks as they arrive; it yields complete payloads and keeps the
 * remainder buffered. A length prefix beyond MAX_FRAME is unrecoverable
 * because the frame boundary is lost, so it throws ProtocolError.
 */
export class FrameDecoder {
  private pending: Buffer = Buffer.alloc(0);

  push(chunk: Buffer): Buffer[] {
    this.pending = this.pending.length === 0 ? chunk : Buffer.concat([this.pending, chunk]);
    const frames: Buffer[] = [];
    while (this.pending.length >= 4) {
      const length = this.pending.readUInt32LE(0);
      if (length > MAX_FRAME) {
        throw new ProtocolError(`frame length ${length} exceeds limit ${MAX_FRAME}`);
      }
      if (this.pending.length < 4 + length) {
        break;
      }
      frames.push(this.pending.subarray(4, 4 + length));
      this.pending = this.pending.subarray(4 + length);
    }
    return frames;
  }

  /** Bytes sitting in the buffer that do not yet form a complete frame. */
  get buffered(): number {
    return this.pending.length;
  }
}

export function encodeFrame(payload: Buffer): Buffer {
  const prefix = Buffer.allocUnsafe(4);
  prefix.writeUInt32LE(payload.length, 0);
  return Buffer.concat([prefix, payload]);
}
