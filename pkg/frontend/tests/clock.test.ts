import { describe, expect, it } from 'vitest';
import { PlaybackClock } from '../src/clock';

function clockAt(startMs = 0) {
  let nowMs = startMs;
  const clock = new PlaybackClock(() => nowMs);
  return { clock, advance: (ms: number) => { nowMs += ms; } };
}

describe('playback clock', () => {
  it('advances at speed times wall time', () => {
    const { clock, advance } = clockAt();
    clock.seek(3600);
    clock.setSpeed(4);
    clock.start();
    advance(30_000);
    expect(clock.currentS()).toBe(3600 + 30 * 4);
  });

  it('stays put while paused', () => {
    const { clock, advance } = clockAt();
    clock.seek(100);
    advance(60_000);
    expect(clock.currentS()).toBe(100);
    clock.start();
    advance(10_000);
    clock.pause();
    advance(60_000);
    expect(clock.currentS()).toBe(110);
  });

  it('keeps progress when the speed changes mid-run', () => {
    const { clock, advance } = clockAt();
    clock.start();
    advance(10_000);
    clock.setSpeed(8);
    advance(5_000);
    expect(clock.currentS()).toBe(10 + 5 * 8);
  });

  it('seeks without disturbing a running clock', () => {
    const { clock, advance } = clockAt();
    clock.setSpeed(2);
    clock.start();
    advance(5_000);
    clock.seek(1000);
    advance(5_000);
    expect(clock.currentS()).toBe(1000 + 5 * 2);
  });

  it('steps relative to the current position', () => {
    const { clock } = clockAt();
    clock.seek(1200);
    clock.step(-600);
    expect(clock.currentS()).toBe(600);
  });

  it('reports whether it is running', () => {
    const { clock } = clockAt();
    expect(clock.running).toBe(false);
    clock.start();
    expect(clock.running).toBe(true);
    clock.pause();
    expect(clock.running).toBe(false);
  });
});
