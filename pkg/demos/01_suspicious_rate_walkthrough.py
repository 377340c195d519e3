#!/usr/bin/env python3
"""
Suspicious-rate walkthrough
===========================

Builds a five-device toy log around one staying interval and walks the
filter pipeline one stage at a time: slot partition, per-slot weights,
suspicious rates, threshold gates, and the final ranked table.
"""
from probesift import (
    FilterConfig,
    ProbeEvent,
    StayingInterval,
    extract_candidates,
    fuse_across_aps,
    linear_weighting,
    parse_mac,
    per_ap_suspicious_rates,
    slot_partition,
)

# The operator decided (from camera sightings) that the culprit was near
# ap1 between t=1000 and t=1120.
staying = StayingInterval(ap_id="ap1", enter=1000.0, exit=1120.0)
cfg = FilterConfig(slot_len=30.0, slots_per_side=4, rate_threshold=0.5)

print("slots around the staying interval (weight grows with distance):")
for slot in slot_partition(staying, cfg):
    print(f"  [{slot.start:7.1f}, {slot.end:7.1f})  {slot.side:>6}  n={slot.index_n}"
          f"  weight={linear_weighting(slot.index_n):.4f}")

# Five devices with distinct behaviours.
CULPRIT = parse_mac("aa:00:00:00:00:01")   # present only during the staying interval
STABLE = parse_mac("aa:00:00:00:00:02")    # parked next to the AP all day
DISTANT = parse_mac("aa:00:00:00:00:03")   # present throughout, but far away
LINGERER = parse_mac("aa:00:00:00:00:04")  # leaves one slot after the culprit
PASSERBY = parse_mac("aa:00:00:00:00:05")  # never seen during the staying interval

events = []
events += [ProbeEvent(t, "ap1", CULPRIT, -52.0) for t in (1005.0, 1060.0, 1110.0)]
events += [ProbeEvent(t, "ap1", STABLE, -48.0) for t in range(880, 1240, 20)]
events += [ProbeEvent(t, "ap1", DISTANT, -83.0) for t in range(880, 1240, 25)]
events += [ProbeEvent(t, "ap1", LINGERER, -55.0) for t in (1010.0, 1100.0, 1135.0)]
events += [ProbeEvent(t, "ap1", PASSERBY, -50.0) for t in (905.0, 1150.0)]

rates = per_ap_suspicious_rates(events, staying, cfg)
print("\nper-MAC suspicious rate and staying-time peak RSSI:")
for mac, rate in sorted(rates.rates.items(), key=lambda kv: -kv[1]):
    print(f"  {mac}  rate={rate:7.4f}  max_rssi={rates.max_rssi_in_staying[mac]:6.1f} dBm")
print(f"  ({PASSERBY} is absent: never observed while the culprit stayed)")

candidates = extract_candidates(rates, cfg)
print(f"\ncandidates after both gates (rate >= {cfg.rate_threshold}, "
      f"rssi >= {cfg.rssi_threshold} dBm):")
for mac in sorted(candidates):
    print(f"  {mac}")

table = fuse_across_aps([(rates, candidates)], {"ap1"})
print("\nranked table (single AP, so fusion is a formality here):")
print(table.render_text())
