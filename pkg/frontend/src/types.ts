export type Decision = 'Authentic' | 'SuspectedDeepFake' | 'Inconclusive';

export interface PatternDescriptor {
  shape: string;
  fg: [number, number, number];
  bg: [number, number, number];
  physical_height_cm: number;
  seed: number;
  text: string | null;
}

export interface SessionInfo {
  id: string;
  pattern: PatternDescriptor;
  config: { ncc_threshold: number; [key: string]: unknown };
  pattern_url: string;
}

export interface EyeRecord {
  label: string;
  u?: number;
  v?: number;
  scale_index?: number;
  score?: number;
  error?: string;
}

export interface ScoreRecord {
  index: number;
  decision: Decision;
  best_score: number | null;
  threshold: number;
  eyes: EyeRecord[];
  failure_reason?: string;
}

export interface Verdict {
  decision: Decision;
  best_score: number | null;
  threshold: number;
  eyes: EyeRecord[];
  failure_reason?: string;
}

export type StreamEvent =
  | { kind: 'score'; record: ScoreRecord }
  | { kind: 'verdict'; verdict: Verdict };
