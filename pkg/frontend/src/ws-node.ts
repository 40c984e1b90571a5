// Minimal RFC 6455 client over node:net, used by the test suite (node 20
// has no stable global WebSocket). Text frames only; client-to-server
// payloads are masked as the RFC requires.

import { createHash, randomBytes } from "node:crypto";
import { Socket, connect } from "node:net";

const WS_MAGIC = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

export class NodeWsClient {
  private socket: Socket;
  private buffer = Buffer.alloc(0);
  private handshook = false;
  private messageQueue: string[] = [];
  private waiters: ((text: string | null) => void)[] = [];
  private closed = false;

  private constructor(socket: Socket) {
    this.socket = socket;
  }

  static async open(host: string, port: number, timeoutMs = 5000): Promise<NodeWsClient> {
    const socket = connect({ host, port });
    const client = new NodeWsClient(socket);
    await new Promise<void>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("connect timeout")), timeoutMs);
      socket.once("connect", () => {
        clearTimeout(timer);
        resolve();
      });
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
    const key = randomBytes(16).toString("base64");
    socket.write(
      `GET / HTTP/1.1\r\nHost: ${host}:${port}\r\n` +
      "Upgrade: websocket\r\nConnection: Upgrade\r\n" +
      `Sec-WebSocket-Key: ${key}\r\nSec-WebSocket-Version: 13\r\n\r\n`,
    );
    const expected = createHash("sha1").update(key + WS_MAGIC).digest("base64");
    await new Promise<void>((resolve, reject) => {
      const timer = setTimeout(() => reject(new Error("handshake timeout")), timeoutMs);
      const onData = (chunk: Buffer) => {
        client.buffer = Buffer.concat([client.buffer, chunk]);
        const end = client.buffer.indexOf("\r\n\r\n");
        if (end === -1) return;
        const header = client.buffer.subarray(0, end).toString();
        client.buffer = client.buffer.subarray(end + 4);
        socket.off("data", onData);
        clearTimeout(timer);
        if (!header.includes(" 101 ") || !header.includes(expected)) {
          reject(new Error(`handshake rejected: ${header.split("\r\n")[0]}`));
          return;
        }
        client.handshook = true;
        socket.on("data", (more) => client.onData(more));
        client.onData(Buffer.alloc(0)); // drain anything already buffered
        resolve();
      };
      socket.on("data", onData);
      socket.once("error", (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
    socket.on("close", () => client.onClose());
    socket.on("error", () => client.onClose());
    return client;
  }

  private onClose(): void {
    this.closed = true;
    for (const waiter of this.waiters.splice(0)) waiter(null);
  }

  private onData(chunk: Buffer): void {
    this.buffer = Buffer.concat([this.buffer, chunk]);
    while (true) {
      if (this.buffer.length < 2) return;
      const b0 = this.buffer[0]!;
      const b1 = this.buffer[1]!;
      const opcode = b0 & 0x0f;
      let length = b1 & 0x7f;
      let offset = 2;
      if (length === 126) {
        if (this.buffer.length < 4) return;
        length = this.buffer.readUInt16BE(2);
        offset = 4;
      } else if (length === 127) {
        if (this.buffer.length < 10) return;
        length = Number(this.buffer.readBigUInt64BE(2));
        offset = 10;
      }
      const masked = (b1 & 0x80) !== 0;
      const maskLen = masked ? 4 : 0;
      if (this.buffer.length < offset + maskLen + length) return;
      let payload = this.buffer.subarray(offset + maskLen, offset + maskLen + length);
      if (masked) {
        const mask = this.buffer.subarray(offset, offset + 4);
        payload = Buffer.from(payload.map((byte, i) => byte ^ mask[i % 4]!));
      }
      this.buffer = this.buffer.subarray(offset + maskLen + length);
      if (opcode === 0x8) {
        this.sendFrame(0x8, Buffer.alloc(0));
        this.socket.end();
        this.onClose();
        return;
      }
      if (opcode === 0x9) {
        this.sendFrame(0xa, Buffer.from(payload));
        continue;
      }
      if (opcode === 0xa) continue;
      const text = payload.toString("utf-8");
      const waiter = this.waiters.shift();
      if (waiter) waiter(text);
      else this.messageQueue.push(text);
    }
  }

  private sendFrame(opcode: number, payload: Buffer): void {
    if (this.closed) return;
    const mask = randomBytes(4);
    let header: Buffer;
    if (payload.length < 126) {
      header = Buffer.from([0x80 | opcode, 0x80 | payload.length]);
    } else if (payload.length < 65536) {
      header = Buffer.alloc(4);
      header[0] = 0x80 | opcode;
      header[1] = 0x80 | 126;
      header.writeUInt16BE(payload.length, 2);
    } else {
      header = Buffer.alloc(10);
      header[0] = 0x80 | opcode;
      header[1] = 0x80 | 127;
      header.writeBigUInt64BE(BigInt(payload.length), 2);
    }
    const body = Buffer.from(payload.map((byte, i) => byte ^ mask[i % 4]!));
    this.socket.write(Buffer.concat([header, mask, body]));
  }

  send(text: string): void {
    this.sendFrame(0x1, Buffer.from(text, "utf-8"));
  }

  /** Next text message, or null on close/timeout. */
  recv(timeoutMs = 5000): Promise<string | null> {
    const queued = this.messageQueue.shift();
    if (queued !== undefined) return Promise.resolve(queued);
    if (this.closed) return Promise.resolve(null);
    return new Promise((resolve) => {
      const timer = setTimeout(() => {
        const index = this.waiters.indexOf(waiter);
        if (index >= 0) this.waiters.splice(index, 1);
        resolve(null);
      }, timeoutMs);
      const waiter = (text: string | null) => {
        clearTimeout(timer);
        resolve(text);
      };
      this.waiters.push(waiter);
    });
  }

  close(): void {
    if (!this.closed) {
      this.sendFrame(0x8, Buffer.alloc(0));
      this.socket.end();
      this.closed = true;
    }
  }
}
