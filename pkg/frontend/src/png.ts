/**
 * Minimal PNG codec for 8-bit images, dependency-free so the exact bytes
 * uploaded to the server are produced by our own deterministic encoder.
 *
 * Encoding writes grayscale with filter 0 and stored (uncompressed) deflate
 * blocks - valid zlib, bit-reproducible everywhere. Decoding handles any
 * 8-bit gray/RGB(+alpha) PNG with scanline filters 0-4 (the server's PNGs
 * are zlib-compressed), inflating through DecompressionStream, which exists
 * in both browsers and node.
 */

import type { Raster } from "./raster.js";

const SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < bytes.length; i++) c = CRC_TABLE[(c ^ bytes[i]) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (let i = 0; i < bytes.length; i++) {
    a = (a + bytes[i]) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function u32be(v: number): Uint8Array {
  return new Uint8Array([(v >>> 24) & 0xff, (v >>> 16) & 0xff, (v >>> 8) & 0xff, v & 0xff]);
}

function chunk(type: string, payload: Uint8Array): Uint8Array {
  const head = new Uint8Array(4 + payload.length);
  for (let i = 0; i < 4; i++) head[i] = type.charCodeAt(i);
  head.set(payload, 4);
  const out = new Uint8Array(4 + head.length + 4);
  out.set(u32be(payload.length), 0);
  out.set(head, 4);
  out.set(u32be(crc32(head)), 4 + head.length);
  return out;
}

/** zlib stream with stored deflate blocks (no compression, fully portable). */
function storedZlib(raw: Uint8Array): Uint8Array {
  const blocks: Uint8Array[] = [new Uint8Array([0x78, 0x01])];
  const max = 65535;
  for (let off = 0; off < raw.length || off === 0; off += max) {
    const part = raw.subarray(off, Math.min(off + max, raw.length));
    const final = off + max >= raw.length ? 1 : 0;
    const header = new Uint8Array(5);
    header[0] = final;
    header[1] = part.length & 0xff;
    header[2] = (part.length >>> 8) & 0xff;
    header[3] = ~part.length & 0xff;
    header[4] = (~part.length >>> 8) & 0xff;
    blocks.push(header, part);
    if (final) break;
  }
  blocks.push(u32be(adler32(raw)));
  let total = 0;
  for (const b of blocks) total += b.length;
  const out = new Uint8Array(total);
  let at = 0;
  for (const b of blocks) {
    out.set(b, at);
    at += b.length;
  }
  return out;
}

export function encodeGrayPng(r: Raster): Uint8Array {
  const ihdr = new Uint8Array(13);
  ihdr.set(u32be(r.width), 0);
  ihdr.set(u32be(r.height), 4);
  ihdr[8] = 8;  // bit depth
  ihdr[9] = 0;  // grayscale
  const raw = new Uint8Array((r.width + 1) * r.height);
  for (let y = 0; y < r.height; y++) {
    raw[y * (r.width + 1)] = 0; // filter: none
    raw.set(r.data.subarray(y * r.width, (y + 1) * r.width), y * (r.width + 1) + 1);
  }
  const parts = [new Uint8Array(SIGNATURE), chunk("IHDR", ihdr),
                 chunk("IDAT", storedZlib(raw)), chunk("IEND", new Uint8Array(0))];
  let total = 0;
  for (const p of parts) total += p.length;
  const out = new Uint8Array(total);
  let at = 0;
  for (const p of parts) {
    out.set(p, at);
    at += p.length;
  }
  return out;
}

async function inflateZlib(data: Uint8Array): Promise<Uint8Array> {
  const ds = new DecompressionStream("deflate");
  const stream = new Blob([data as BlobPart]).stream().pipeThrough(ds);
  return new Uint8Array(await new Response(stream).arrayBuffer());
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export async function decodeGrayPng(bytes: Uint8Array): Promise<Raster> {
  for (let i = 0; i < 8; i++) {
    if (bytes[i] !== SIGNATURE[i]) throw new Error("not a PNG file");
  }
  let width = 0;
  let height = 0;
  let colorType = 0;
  const idat: Uint8Array[] = [];
  let at = 8;
  while (at < bytes.length) {
    const len = (bytes[at] << 24 | bytes[at + 1] << 16 | bytes[at + 2] << 8 | bytes[at + 3]) >>> 0;
    const type = String.fromCharCode(bytes[at + 4], bytes[at + 5], bytes[at + 6], bytes[at + 7]);
    const payload = bytes.subarray(at + 8, at + 8 + len);
    if (type === "IHDR") {
      width = (payload[0] << 24 | payload[1] << 16 | payload[2] << 8 | payload[3]) >>> 0;
      height = (payload[4] << 24 | payload[5] << 16 | payload[6] << 8 | payload[7]) >>> 0;
      const bitDepth = payload[8];
      colorType = payload[9];
      if (bitDepth !== 8) throw new Error(`unsupported PNG bit depth ${bitDepth}`);
      if (payload[12] !== 0) throw new Error("interlaced PNG not supported");
      if (![0, 2, 4, 6].includes(colorType)) {
        throw new Error(`unsupported PNG color type ${colorType}`);
      }
    } else if (type === "IDAT") {
      idat.push(payload);
    } else if (type === "IEND") {
      break;
    }
    at += 12 + len;
  }
  if (!width || !height) throw new Error("PNG missing IHDR");
  let total = 0;
  for (const p of idat) total += p.length;
  const z = new Uint8Array(total);
  let zat = 0;
  for (const p of idat) {
    z.set(p, zat);
    zat += p.length;
  }
  const raw = await inflateZlib(z);
  const channels = { 0: 1, 2: 3, 4: 2, 6: 4 }[colorType as 0 | 2 | 4 | 6];
  const stride = width * channels;
  if (raw.length < (stride + 1) * height) throw new Error("PNG pixel data truncated");
  const pixels = new Uint8Array(stride * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const row = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const out = pixels.subarray(y * stride, (y + 1) * stride);
    const prev = y > 0 ? pixels.subarray((y - 1) * stride, y * stride) : null;
    for (let i = 0; i < stride; i++) {
      const a = i >= channels ? out[i - channels] : 0;
      const b = prev ? prev[i] : 0;
      const c = prev && i >= channels ? prev[i - channels] : 0;
      let v = row[i];
      if (filter === 1) v += a;
      else if (filter === 2) v += b;
      else if (filter === 3) v += (a + b) >> 1;
      else if (filter === 4) v += paeth(a, b, c);
      else if (filter !== 0) throw new Error(`unsupported PNG filter ${filter}`);
      out[i] = v & 0xff;
    }
  }
  const gray = new Uint8Array(width * height);
  if (colorType === 0) {
    gray.set(pixels);
  } else if (colorType === 4) {
    for (let i = 0; i < gray.length; i++) gray[i] = pixels[i * 2];
  } else {
    const ch = channels;
    for (let i = 0; i < gray.length; i++) {
      gray[i] = Math.min(255, Math.round(
        0.299 * pixels[i * ch] + 0.587 * pixels[i * ch + 1] + 0.114 * pixels[i * ch + 2]));
    }
  }
  return { width, height, data: gray };
}
