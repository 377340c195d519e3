/** Document shapes served by the probesift HTTP API. */

export interface SightingDoc {
  timestamp: number;
  ap_id: string;
  persona_id: string;
  image_ref: string;
}

export interface StayingIntervalDoc {
  ap_id: string;
  enter: number;
  exit: number;
}

export interface FilterConfigDoc {
  slot_len: number;
  slots_per_side: number;
  rssi_threshold: number;
  /** null asks the server for its default (half the maximum attainable rate). */
  rate_threshold: number | null;
  sides: "both" | "before_only" | "after_only";
}

export interface TableRowDoc {
  mac: string;
  rates: Record<string, number>;
  sum: number;
}

export interface ResultTableDoc {
  schema_version: number;
  target_aps: string[];
  rows: TableRowDoc[];
  truncated_aps: string[];
}

export interface InvestigationDoc {
  schema_version: number;
  id: string;
  log_id: string;
  staying_intervals: StayingIntervalDoc[];
  config: FilterConfigDoc;
  result: ResultTableDoc | null;
  created_at: number;
  status: "draft" | "complete";
  version: number;
}

export interface RunResponseDoc {
  version: number;
  result: ResultTableDoc;
}
