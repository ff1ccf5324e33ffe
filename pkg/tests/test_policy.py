import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import strategies as ces
from maccesec.errors import UnknownField, UnmappedCeKind
from maccesec.mac_codec import (
    BagField,
    CRntiCe,
    FieldBagCe,
    ShortBsrCe,
    SpCsiPucchActDeactCe,
    TaCommandCe,
    assemble_pdu,
)
from maccesec.policy import (
    CeFieldMap,
    Mechanism,
    PolicyRegistry,
    join_all,
    required_mechanism,
)

# Independent transcription of the published sensitivity tables. The shipped
# JSON file must agree with this list on every row; a drift in either copy
# fails the suite. Tuple layout:
# (field, tamper risk label, risk stars, confidentiality, integrity, latency, mechanism)
GOLDEN_TABLE = [
    ("C-RNTI", "Business Hijacking and Denial of Service", 5, 3, 3, 3, "M4"),
    ("TA Command", "Uplink Synchronization Loss", 5, 1, 4, 4, "M2"),
    (
        "UE Contention Resolution Identity",
        "Access Hijacking and Rogue Base Station Inducement",
        5, 2, 3, 3, "M2",
    ),
    ("SSB Index", "Communication Interruption and Location Spoofing", 5, 1, 3, 3, "M2"),
    ("Spatial Relation Info ID", "Beam Misguidance and Location Exposure", 4, 3, 4, 3, "M4"),
    ("TCI State ID", "Downlink Eavesdropping and Signal Jamming", 4, 3, 4, 3, "M4"),
    ("PCI", "Handover Attack and Measurement Interference", 4, 1, 2, 4, "M1"),
    (
        "Cell Info ID",
        "Incorrect beam configuration and backhaul link interruption",
        4, 3, 4, 3, "M4",
    ),
    (
        "TAG ID",
        "Intra-Group Synchronization Disruption and Uplink Collision",
        3, 1, 3, 3, "M2",
    ),
    ("Resource Serving Cell ID", "Inter-Base-Station Beam Misalignment", 3, 2, 3, 2, "M2"),
    ("SRS Resource's Cell ID", "Channel Measurement Contamination", 3, 2, 3, 2, "M2"),
    ("LCG ID", "QoS Degradation and Bandwidth Deprivation", 2, 1, 1, 1, "M1"),
    ("Serving Cell ID", "Signaling Storm and Resource Allocation Error", 2, 2, 3, 2, "M2"),
    ("Candidate Cell ID", "Erroneous Handover", 2, 2, 3, 3, "M2"),
    ("BWP ID", "Reduced Transmission Rate", 1, 1, 1, 2, "M1"),
    ("SRS Resource's BWP ID", "Localized Measurement Failure", 1, 1, 1, 2, "M1"),
]


class TestTableFidelity:
    def test_exactly_sixteen_records(self, policy):
        assert len(policy.field_names()) == 16

    @pytest.mark.parametrize(
        "name,label,risk,conf,integ,lat,mech", GOLDEN_TABLE, ids=[r[0] for r in GOLDEN_TABLE]
    )
    def test_row(self, policy, name, label, risk, conf, integ, lat, mech):
        rec = policy.classify_field(name)
        assert rec.field_name == name
        assert rec.tamper_risk == label
        assert rec.risk_stars == risk
        assert rec.confidentiality_stars == conf
        assert rec.integrity_stars == integ
        assert rec.latency_stars == lat
        assert rec.mechanism is Mechanism.parse(mech)

    def test_risk_rating_examples(self, policy):
        assert policy.risk_rating("SSB Index") == (
            5, "Communication Interruption and Location Spoofing"
        )
        assert policy.risk_rating("Serving Cell ID") == (
            2, "Signaling Storm and Resource Allocation Error"
        )
        assert policy.risk_rating("SRS Resource's BWP ID") == (
            1, "Localized Measurement Failure"
        )


class TestLookup:
    @pytest.mark.parametrize(
        "variant,canonical",
        [
            ("ta command", "TA Command"),
            ("TA-COMMAND", "TA Command"),
            ("Timing Advance Command", "TA Command"),
            ("c_rnti", "C-RNTI"),
            ("Cell info", "Cell Info ID"),
            ("cell info id", "Cell Info ID"),
            ("Physical Cell ID", "PCI"),
            ("UE Contention Resolution Identifier", "UE Contention Resolution Identity"),
            ("srs resource's bwp id", "SRS Resource's BWP ID"),
        ],
    )
    def test_case_and_punctuation_insensitive(self, policy, variant, canonical):
        assert policy.classify_field(variant).field_name == canonical

    def test_unknown_field(self, policy):
        with pytest.raises(UnknownField):
            policy.classify_field("no-such-field")
        with pytest.raises(UnknownField):
            policy.risk_rating("")

    def test_file_round_trip(self, policy, tmp_path):
        path = tmp_path / "policy.json"
        policy.save(path)
        again = PolicyRegistry.load(path)
        assert again.field_names() == policy.field_names()
        for name in policy.field_names():
            assert again.classify_field(name) == policy.classify_field(name)


class TestMechanismLattice:
    ORDER = {
        (Mechanism.M1, Mechanism.M1): True,
        (Mechanism.M1, Mechanism.M2): True,
        (Mechanism.M1, Mechanism.M3): True,
        (Mechanism.M1, Mechanism.M4): True,
        (Mechanism.M2, Mechanism.M2): True,
        (Mechanism.M2, Mechanism.M4): True,
        (Mechanism.M3, Mechanism.M3): True,
        (Mechanism.M3, Mechanism.M4): True,
        (Mechanism.M4, Mechanism.M4): True,
    }

    def test_partial_order(self):
        for a, b in itertools.product(Mechanism, repeat=2):
            assert b.covers(a) == self.ORDER.get((a, b), False)

    def test_join_table(self):
        for a, b in itertools.product(Mechanism, repeat=2):
            j = a.join(b)
            # least upper bound: above both, and minimal among upper bounds
            assert j.covers(a) and j.covers(b)
            uppers = [m for m in Mechanism if m.covers(a) and m.covers(b)]
            assert all(u.covers(j) for u in uppers)

    def test_incomparable_pair_joins_to_top(self):
        assert Mechanism.M2.join(Mechanism.M3) is Mechanism.M4
        assert Mechanism.M3.join(Mechanism.M2) is Mechanism.M4

    def test_join_all_empty_is_bottom(self):
        assert join_all([]) is Mechanism.M1

    def test_parse_forms(self):
        assert Mechanism.parse("m2") is Mechanism.M2
        assert Mechanism.parse(4) is Mechanism.M4
        assert Mechanism.parse(Mechanism.M3) is Mechanism.M3
        with pytest.raises(ValueError):
            Mechanism.parse("M9")

    @given(st.lists(st.sampled_from(list(Mechanism)), max_size=6))
    def test_join_all_is_upper_bound(self, mechs):
        top = join_all(mechs)
        assert all(top.covers(m) for m in mechs)


class TestRequiredMechanism:
    def test_bsr_only_pdu(self, cefmap, policy):
        assert required_mechanism([ShortBsrCe(lcg_id=0, buffer_size=1)], cefmap, policy) is Mechanism.M1

    def test_ta_command_pdu(self, cefmap, policy):
        assert (
            required_mechanism([TaCommandCe(tag_id=0, ta_command=1)], cefmap, policy)
            is Mechanism.M2
        )

    def test_mixed_pdu_joins(self, cefmap, policy, registry):
        pdu = assemble_pdu(
            "dl",
            [CRntiCe(crnti=1), TaCommandCe(tag_id=0, ta_command=1)],
            registry=registry,
        )
        assert required_mechanism(pdu, cefmap, policy) is Mechanism.M4

    def test_no_ces_is_bottom(self, cefmap, policy, registry):
        pdu = assemble_pdu("dl", [], [b"\x01"], registry=registry)
        assert required_mechanism(pdu, cefmap, policy) is Mechanism.M1

    def test_sp_csi_joins_cell_and_bwp(self, cefmap, policy):
        ce = SpCsiPucchActDeactCe(
            serving_cell_id=1, bwp_id=0, l_flag=0, s_bits=(False,) * 8
        )
        # Serving Cell ID -> M2 dominates BWP ID -> M1
        assert required_mechanism([ce], cefmap, policy) is Mechanism.M2

    def test_bag_field_uses_policy(self, cefmap, policy):
        ce = FieldBagCe(fields=(BagField("PCI", 10, 7),))
        assert required_mechanism([ce], cefmap, policy) is Mechanism.M1

    def test_bag_with_unknown_name_fails_closed(self, cefmap, policy):
        ce = FieldBagCe(fields=(BagField("mystery", 4, 7),))
        with pytest.raises(UnknownField):
            required_mechanism([ce], cefmap, policy)

    def test_unmapped_kind(self, policy):
        empty_map = CeFieldMap({})
        with pytest.raises(UnmappedCeKind):
            required_mechanism([CRntiCe(crnti=1)], empty_map, policy)

    @given(ce_list=st.lists(ces.any_ce, max_size=4), extra=ces.any_ce)
    def test_monotone_in_ce_set(self, cefmap, policy, ce_list, extra):
        def req(items):
            try:
                return required_mechanism(items, cefmap, policy)
            except UnknownField:
                return None

        base = req(ce_list)
        grown = req(ce_list + [extra])
        if base is not None and grown is not None:
            assert grown.covers(base)
