/** Fixed-capacity ring buffer for the e_a sparkline. */

export class RingBuffer {
  private readonly data: number[];
  private head = 0;
  private count = 0;

  constructor(readonly capacity: number) {
    if (!Number.isInteger(capacity) || capacity < 1) {
      throw new Error(`capacity must be a positive integer, got ${capacity}`);
    }
    this.data = new Array(capacity).fill(0);
  }

  push(value: number): void {
    this.data[this.head] = value;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count += 1;
  }

  get length(): number {
    return this.count;
  }

  /** Values oldest to newest. */
  values(): number[] {
    const out: number[] = [];
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i += 1) {
      out.push(this.data[(start + i) % this.capacity]);
    }
    return out;
  }

  max(): number {
    let best = -Infinity;
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i += 1) {
      const v = this.data[(start + i) % this.capacity];
      if (v > best) best = v;
    }
    return best;
  }
}
