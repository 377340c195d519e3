import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probesift.errors import ValidationError
from probesift.filtering import (
    FilterConfig,
    PerApRates,
    SuspiciousRateTable,
    effective_rate_threshold,
    extract_candidates,
    fuse_across_aps,
    linear_weighting,
    max_attainable_rate,
    per_ap_suspicious_rates,
    run_filter,
    slot_partition,
)
from probesift.model import StayingInterval

from .conftest import ev, mac
from .oracle import brute_force_rates


class TestLinearWeighting:
    def test_first_slot(self):
        assert linear_weighting(0) == pytest.approx(2 / 31, rel=1e-15)

    def test_slot_30_reaches_two(self):
        assert linear_weighting(30) == pytest.approx(2.0, rel=1e-15)

    def test_slot_14(self):
        assert linear_weighting(14) == pytest.approx(30 / 31, rel=1e-15)

    def test_thirty_slot_sum_is_thirty(self):
        # mean weight over the default 30-slot window is exactly 1
        assert math.fsum(linear_weighting(n) for n in range(30)) == pytest.approx(
            30.0, abs=1e-12)

    def test_negative_index_rejected(self):
        with pytest.raises(ValidationError):
            linear_weighting(-1)


class TestSlotPartition:
    def test_two_per_side(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=2)
        slots = [(s.start, s.end, s.side, s.index_n) for s in slot_partition(staying, cfg)]
        assert slots == [
            (940.0, 970.0, "before", 1),
            (970.0, 1000.0, "before", 0),
            (1120.0, 1150.0, "after", 0),
            (1150.0, 1180.0, "after", 1),
        ]

    def test_zero_slots(self, staying):
        assert slot_partition(staying, FilterConfig(slots_per_side=0)) == []

    def test_after_only(self):
        staying = StayingInterval("ap1", 0.0, 60.0)
        cfg = FilterConfig(slot_len=30.0, slots_per_side=1, sides="after_only")
        slots = slot_partition(staying, cfg)
        assert [(s.start, s.end, s.index_n) for s in slots] == [(60.0, 90.0, 0)]

    def test_no_overlap_with_staying_or_each_other(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=5)
        slots = slot_partition(staying, cfg)
        assert len(slots) == 10
        for s in slots:
            assert s.end <= staying.enter or s.start >= staying.exit
        bounds = sorted((s.start, s.end) for s in slots)
        for (a1, b1), (a2, _b2) in zip(bounds, bounds[1:]):
            assert b1 <= a2

    def test_slot_zero_abuts_staying(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=3)
        by_side = {(s.side, s.index_n): s for s in slot_partition(staying, cfg)}
        assert by_side[("before", 0)].end == staying.enter
        assert by_side[("after", 0)].start == staying.exit


class TestPerApRates:
    CFG2 = FilterConfig(slot_len=30.0, slots_per_side=2)

    def test_staying_only_mac_gets_twelve_thirtyfirsts(self, staying):
        # hand-sum of the four slot weights: 2*(2/31 + 4/31); brute-forced below
        events = [ev(1050.0, m=mac(1))]
        rates = per_ap_suspicious_rates(events, staying, self.CFG2)
        assert rates.rates[mac(1)] == pytest.approx(12 / 31, abs=1e-12)
        oracle = brute_force_rates(events, staying, 30.0, 2)
        assert rates.rates[mac(1)] == pytest.approx(oracle[mac(1)], abs=1e-12)

    def test_mac_in_every_slot_has_zero_rate(self, staying):
        events = [ev(1050.0, m=mac(2))]
        events += [ev(t, m=mac(2)) for t in (955.0, 985.0, 1125.0, 1155.0)]
        rates = per_ap_suspicious_rates(events, staying, self.CFG2)
        assert rates.rates[mac(2)] == 0.0

    def test_mac_absent_from_staying_is_omitted(self, staying):
        events = [ev(955.0, m=mac(3)), ev(1050.0, m=mac(1))]
        rates = per_ap_suspicious_rates(events, staying, self.CFG2)
        assert mac(3) not in rates.rates
        assert mac(3) not in rates.max_rssi_in_staying

    def test_staying_only_mac_attains_sixty_with_default_slots(self, staying):
        cfg = FilterConfig()
        rates = per_ap_suspicious_rates([ev(1050.0, m=mac(1))], staying, cfg)
        # each side sums to sum_{n=0..29} 2(n+1)/31 = 30; brute-force agrees
        assert rates.rates[mac(1)] == pytest.approx(60.0, abs=1e-12)
        assert rates.rates[mac(1)] == max_attainable_rate(cfg)
        oracle = brute_force_rates([ev(1050.0, m=mac(1))], staying, 30.0, 30)
        assert rates.rates[mac(1)] == pytest.approx(oracle[mac(1)], abs=1e-9)

    def test_empty_event_list_is_valid(self, staying):
        rates = per_ap_suspicious_rates([], staying, self.CFG2)
        assert rates.rates == {} and rates.max_rssi_in_staying == {}

    def test_max_rssi_tracks_peak_over_staying_events(self, staying):
        events = [ev(1010.0, m=mac(1), rssi=-80.0), ev(1020.0, m=mac(1), rssi=-55.5),
                  ev(1200.0, m=mac(1), rssi=-10.0)]
        rates = per_ap_suspicious_rates(events, staying, self.CFG2)
        assert rates.max_rssi_in_staying[mac(1)] == -55.5

    def test_rejects_foreign_ap_events(self, staying):
        with pytest.raises(ValidationError):
            per_ap_suspicious_rates([ev(1050.0, ap="ap2")], staying, self.CFG2)

    def test_boundary_event_at_exit_counts_as_slot_not_staying(self, staying):
        events = [ev(1050.0, m=mac(1)), ev(staying.exit, m=mac(1))]
        rates = per_ap_suspicious_rates(events, staying, self.CFG2)
        # present in after-slot 0 removes its weight from the staying-only total
        assert rates.rates[mac(1)] == pytest.approx(12 / 31 - 2 / 31, abs=1e-12)

    def test_permutation_invariance(self, staying):
        rng = random.Random(4)
        events = [ev(rng.uniform(900.0, 1250.0), m=mac(rng.randrange(4))) for _ in range(60)]
        base = per_ap_suspicious_rates(events, staying, self.CFG2)
        shuffled = events[:]
        rng.shuffle(shuffled)
        again = per_ap_suspicious_rates(shuffled, staying, self.CFG2)
        assert base == again

    def test_monotonicity_under_event_edits(self, staying):
        # deleting one non-staying observation never decreases a rate;
        # adding one never increases it
        rng = random.Random(11)
        cfg = FilterConfig(slot_len=30.0, slots_per_side=4)
        for _ in range(50):
            events = [ev(rng.uniform(850.0, 1300.0), m=mac(rng.randrange(3)))
                      for _ in range(25)]
            events.append(ev(1050.0, m=mac(0)))  # keep mac(0) in the staying set
            base = per_ap_suspicious_rates(events, staying, cfg).rates[mac(0)]
            non_staying = [e for e in events
                           if e.mac == mac(0) and not staying.contains(e.timestamp)]
            if non_staying:
                removed = events[:]
                removed.remove(non_staying[0])
                after = per_ap_suspicious_rates(removed, staying, cfg).rates[mac(0)]
                assert after >= base - 1e-12
            added = events + [ev(rng.uniform(880.0, 1240.0), m=mac(0))]
            after_add = per_ap_suspicious_rates(added, staying, cfg).rates[mac(0)]
            assert after_add <= base + 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(800, 1400), st.integers(0, 5)), max_size=40),
           st.integers(0, 6))
    def test_oracle_agreement_random_logs(self, raw, sps):
        staying = StayingInterval("ap1", 1000.0, 1120.0)
        events = [ev(t, m=mac(i)) for t, i in raw]
        cfg = FilterConfig(slot_len=30.0, slots_per_side=sps)
        rates = per_ap_suspicious_rates(events, staying, cfg).rates
        oracle = brute_force_rates(events, staying, 30.0, sps)
        assert set(rates) == set(oracle)
        for m, r in rates.items():
            assert r == pytest.approx(oracle[m], abs=1e-9)


class TestExtractCandidates:
    def test_both_gates_pass(self):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        rates = PerApRates("ap1", {mac(1): 12 / 31}, {mac(1): -60.0})
        assert extract_candidates(rates, cfg) == {mac(1)}

    def test_rssi_gate_excludes_regardless_of_rate(self):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        rates = PerApRates("ap1", {mac(1): 5.0}, {mac(1): -80.0})
        assert extract_candidates(rates, cfg) == set()

    def test_rate_gate_excludes(self):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        rates = PerApRates("ap1", {mac(1): 0.1}, {mac(1): -60.0})
        assert extract_candidates(rates, cfg) == set()

    def test_default_threshold_is_half_of_max(self):
        cfg = FilterConfig()
        assert effective_rate_threshold(cfg) == pytest.approx(30.0, abs=1e-12)
        cfg_one_side = FilterConfig(sides="after_only")
        assert effective_rate_threshold(cfg_one_side) == pytest.approx(15.0, abs=1e-12)
        explicit = FilterConfig(rate_threshold=1.25)
        assert effective_rate_threshold(explicit) == 1.25


class TestFusion:
    def test_three_ap_sum(self):
        per_ap = []
        for ap, rate in (("ap1", 0.5), ("ap2", 0.4), ("ap3", 0.6)):
            rates = PerApRates(ap, {mac(1): rate}, {mac(1): -50.0})
            per_ap.append((rates, {mac(1)}))
        table = fuse_across_aps(per_ap, {"ap1", "ap2", "ap3"})
        assert len(table.rows) == 1
        row = table.rows[0]
        assert row.mac == mac(1)
        assert row.rates == {"ap1": 0.5, "ap2": 0.4, "ap3": 0.6}
        assert row.total == pytest.approx(1.5, abs=1e-12)

    def test_candidate_missing_at_one_ap_is_dropped(self):
        a = (PerApRates("ap1", {mac(1): 1.0, mac(2): 1.0},
                        {mac(1): -50.0, mac(2): -50.0}), {mac(1), mac(2)})
        b = (PerApRates("ap2", {mac(1): 1.0}, {mac(1): -50.0}), {mac(1)})
        table = fuse_across_aps([a, b], {"ap1", "ap2"})
        assert [r.mac for r in table.rows] == [mac(1)]

    def test_empty_targets_rejected(self):
        with pytest.raises(ValidationError):
            fuse_across_aps([], set())

    def test_missing_entry_rejected(self):
        a = (PerApRates("ap1", {}, {}), set())
        with pytest.raises(ValidationError):
            fuse_across_aps([a], {"ap1", "ap2"})

    def test_rows_sorted_by_sum_then_mac(self):
        per_ap_rates = PerApRates(
            "ap1",
            {mac(3): 2.0, mac(1): 2.0, mac(2): 5.0},
            {mac(3): -50.0, mac(1): -50.0, mac(2): -50.0},
        )
        table = fuse_across_aps([(per_ap_rates, {mac(1), mac(2), mac(3)})], {"ap1"})
        assert [r.mac for r in table.rows] == [mac(2), mac(1), mac(3)]

    def test_sums_recompute_from_columns(self):
        rng = random.Random(9)
        per_ap = []
        targets = {"ap1", "ap2", "ap3", "ap4"}
        for ap in sorted(targets):
            rates = {mac(i): rng.uniform(0, 60) for i in range(6)}
            per_ap.append((PerApRates(ap, rates, {m: -40.0 for m in rates}),
                           set(rates)))
        table = fuse_across_aps(per_ap, targets)
        for row in table.rows:
            assert row.total == math.fsum(row.rates[ap] for ap in table.target_aps)


class TestRunFilter:
    def test_single_ap_one_device_table(self, staying):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        events = [ev(1020.0, m=mac(1), rssi=-48.0), ev(1060.0, m=mac(1), rssi=-52.0)]
        table = run_filter(events, [staying], cfg)
        assert len(table.rows) == 1
        assert table.rows[0].mac == mac(1)
        assert table.rows[0].rates["ap1"] == pytest.approx(12 / 31, abs=1e-12)
        assert table.rows[0].total == pytest.approx(12 / 31, abs=1e-12)

    def test_bystander_only_log_yields_empty_table(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=2, rate_threshold=0.3)
        # stable device present throughout; distant device below the RSSI gate
        events = [ev(t, m=mac(7)) for t in (940.5, 975.0, 1040.0, 1125.0, 1160.0)]
        events += [ev(t, m=mac(8), rssi=-86.0) for t in (1010.0, 1080.0)]
        table = run_filter(events, [staying], cfg)
        assert table.rows == ()

    def test_culprit_silent_log_excludes_culprit(self, staying):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        events = [ev(t, m=mac(7)) for t in (940.5, 975.0, 1040.0, 1125.0, 1160.0)]
        table = run_filter(events, [staying], cfg)
        assert mac(1) not in [r.mac for r in table.rows]

    def test_two_aps_partial_bystander_dropped(self):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        iv1 = StayingInterval("ap1", 1000.0, 1120.0)
        iv2 = StayingInterval("ap2", 2000.0, 2120.0)
        events = [
            ev(1050.0, ap="ap1", m=mac(1)),  # culprit at ap1
            ev(2050.0, ap="ap2", m=mac(1)),  # culprit at ap2
            ev(1055.0, ap="ap1", m=mac(2)),  # bystander only at ap1
        ]
        table = run_filter(events, [iv1, iv2], cfg)
        assert [r.mac for r in table.rows] == [mac(1)]

    def test_interval_for_ap_without_events_empties_the_table(self, staying):
        cfg = FilterConfig(slots_per_side=2, rate_threshold=0.3)
        iv2 = StayingInterval("ap2", 1000.0, 1120.0)
        events = [ev(1050.0, ap="ap1", m=mac(1))]
        table = run_filter(events, [staying, iv2], cfg)
        assert table.rows == ()
        assert "ap2" in table.truncated_aps

    def test_duplicate_interval_ap_rejected(self, staying):
        with pytest.raises(ValidationError):
            run_filter([], [staying, StayingInterval("ap1", 0.0, 1.0)])

    def test_no_intervals_rejected(self):
        with pytest.raises(ValidationError):
            run_filter([], [])

    def test_truncation_flagged_when_log_shorter_than_slots(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=30, rate_threshold=0.3)
        events = [ev(t, m=mac(1)) for t in (995.0, 1050.0, 1125.0)]
        table = run_filter(events, [staying], cfg)
        assert table.truncated_aps == ("ap1",)

    def test_no_truncation_when_log_spans_slots(self, staying):
        cfg = FilterConfig(slot_len=30.0, slots_per_side=2, rate_threshold=0.3)
        events = [ev(t, m=mac(1)) for t in (930.0, 1050.0, 1190.0)]
        table = run_filter(events, [staying], cfg)
        assert table.truncated_aps == ()


class TestTableSerialization:
    def _table(self):
        per_ap_rates = PerApRates("ap1", {mac(1): 12 / 31, mac(2): 31 / 31},
                                  {mac(1): -50.0, mac(2): -40.0})
        return fuse_across_aps([(per_ap_rates, {mac(1), mac(2)})], {"ap1"},
                               truncated_aps=["ap1"])

    def test_doc_round_trip_preserves_rows_and_order(self):
        table = self._table()
        assert SuspiciousRateTable.from_doc(table.to_doc()) == table

    def test_canonical_json_stable(self):
        table = self._table()
        assert table.canonical_json() == table.canonical_json()
        assert b'"schema_version":1' in table.canonical_json()

    def test_render_text_mentions_every_row(self):
        table = self._table()
        text = table.render_text()
        for row in table.rows:
            assert str(row.mac) in text

    def test_render_text_empty_table(self):
        table = fuse_across_aps([(PerApRates("ap1", {}, {}), set())], {"ap1"})
        assert "(no candidates)" in table.render_text()


class TestConfigValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            FilterConfig(slot_len=0.0)
        with pytest.raises(ValidationError):
            FilterConfig(slots_per_side=-1)
        with pytest.raises(ValidationError):
            FilterConfig(rate_threshold=-0.5)
        with pytest.raises(ValidationError):
            FilterConfig(sides="sideways")

    def test_doc_round_trip(self):
        cfg = FilterConfig(slot_len=10.0, slots_per_side=4, rssi_threshold=-70.0,
                           rate_threshold=1.0, sides="after_only")
        assert FilterConfig.from_doc(cfg.to_doc()) == cfg

    def test_from_doc_rejects_unknown_fields(self):
        with pytest.raises(ValidationError):
            FilterConfig.from_doc({"slot_length": 30.0})
