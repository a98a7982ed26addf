/**
 * Playback clock for history replay: while running, the displayed time
 * advances at `speed` times wall time. Seconds are relative to midnight
 * of the playback date and may pass 86400; the app rolls the date over.
 */

export class PlaybackClock {
  speed = 1;

  private baseS = 0;
  private startedAtMs: number | null = null;
  private now: () => number;

  constructor(now: () => number = () => Date.now()) {
    this.now = now;
  }

  get running(): boolean {
    return this.startedAtMs !== null;
  }

  currentS(): number {
    if (this.startedAtMs === null) return this.baseS;
    return this.baseS + ((this.now() - this.startedAtMs) / 1000) * this.speed;
  }

  start(): void {
    if (this.startedAtMs === null) this.startedAtMs = this.now();
  }

  pause(): void {
    this.baseS = this.currentS();
    this.startedAtMs = null;
  }

  /** Change speed without jumping: progress so far is kept. */
  setSpeed(speed: number): void {
    this.baseS = this.currentS();
    if (this.startedAtMs !== null) this.startedAtMs = this.now();
    this.speed = speed;
  }

  seek(clockS: number): void {
    this.baseS = clockS;
    if (this.startedAtMs !== null) this.startedAtMs = this.now();
  }

  step(deltaS: number): void {
    this.seek(this.currentS() + deltaS);
  }
}
