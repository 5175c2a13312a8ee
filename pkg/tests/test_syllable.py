import unicodedata

import pytest
from hypothesis import given, settings, strategies as st

from vispell import syllable as sy

TELEX = sy.KeystrokeScheme.TELEX
VNI = sy.KeystrokeScheme.VNI


def parse(tok):
    result = sy.parse_syllable(tok)
    assert not isinstance(result, sy.NotASyllable), tok
    return result


class TestParse:
    def test_noi_decomposition(self):
        s = parse("nội")
        assert (s.onset, s.nucleus, s.coda, s.tone) == ("n", "ô", "i", sy.Tone.DOT)
        # cross-check against the keystroke oracle
        assert sy.to_keystrokes(s, TELEX) == "nooij"

    def test_single_vowel_identity(self):
        s = parse("a")
        assert (s.onset, s.nucleus, s.coda, s.tone) == ("", "a", "", sy.Tone.LEVEL)

    def test_garbage_is_not_a_syllable(self):
        assert isinstance(sy.parse_syllable("xyz123"), sy.NotASyllable)
        assert isinstance(sy.parse_syllable("qwrtz"), sy.NotASyllable)
        assert isinstance(sy.parse_syllable(""), sy.NotASyllable)
        assert isinstance(sy.parse_syllable("hà nội"), sy.NotASyllable)

    def test_new_style_tone_placement_rejected(self):
        assert isinstance(sy.parse_syllable("hoà"), sy.NotASyllable)
        assert not isinstance(sy.parse_syllable("hòa"), sy.NotASyllable)

    @pytest.mark.parametrize("tok", ["già", "gì", "giếng", "quýt", "quỳnh",
                                     "khuỷu", "người", "nghiêng", "thuở", "soóc"])
    def test_tricky_spellings_roundtrip(self, tok):
        assert parse(tok).render() == tok

    def test_case_preserved(self):
        assert parse("Hà").render() == "Hà"
        assert parse("NỘI").render() == "NỘI"
        assert parse("HàNG".lower()).render() == "hàng"


class TestStripDiacritics:
    def test_paper_examples(self):
        assert sy.strip_diacritics("hà nội") == "ha noi"
        assert sy.strip_diacritics("ương") == "uong"
        assert sy.strip_diacritics("abc 123") == "abc 123"
        assert sy.strip_diacritics("đường ĐI") == "duong DI"

    def test_matches_nfd_oracle_on_inventory(self):
        drop = {"̀", "́", "̃", "̉", "̣",
                "̂", "̆", "̛"}

        def oracle(s):
            s = s.replace("đ", "d").replace("Đ", "D")
            return unicodedata.normalize(
                "NFC",
                "".join(c for c in unicodedata.normalize("NFD", s) if c not in drop))

        for syl in list(sy.default_inventory())[::17]:
            assert sy.strip_diacritics(syl) == oracle(syl)

    @given(st.text(max_size=40))
    @settings(max_examples=200, deadline=None)
    def test_idempotent(self, text):
        once = sy.strip_diacritics(text)
        assert sy.strip_diacritics(once) == once


class TestKeystrokes:
    def test_paper_telex_examples(self):
        assert sy.to_keystrokes(parse("hà"), TELEX) == "haf"
        assert sy.to_keystrokes(parse("nội"), TELEX) == "nooij"

    def test_vni(self):
        assert sy.to_keystrokes(parse("hà"), VNI) == "ha2"
        assert sy.from_keystrokes("ha2", VNI) == "hà"

    def test_from_keystrokes(self):
        assert sy.from_keystrokes("nooij", TELEX) == "nội"
        assert sy.from_keystrokes("ha", TELEX) == "ha"
        assert sy.from_keystrokes("haf", TELEX) == "hà"

    def test_invalid_sequences_unchanged(self):
        assert sy.from_keystrokes("zzz9", TELEX) == "zzz9"
        assert sy.from_keystrokes("nooi9", VNI) == "nooi9"
        assert sy.from_keystrokes("", TELEX) == ""

    def test_case_pattern_reapplied(self):
        assert sy.from_keystrokes("Haf", TELEX) == "Hà"

    def test_roundtrip_sample(self):
        inventory = sorted(sy.default_inventory())
        for syl in inventory[::7]:
            s = parse(syl)
            for scheme in (TELEX, VNI):
                assert sy.from_keystrokes(sy.to_keystrokes(s, scheme), scheme) == syl

    def test_plain_oo_disambiguated_from_circumflex(self):
        assert sy.to_keystrokes(parse("công"), TELEX) == "coong"
        assert sy.to_keystrokes(parse("coong"), TELEX) == "cooong"
        assert sy.from_keystrokes("coong", TELEX) == "công"
        assert sy.from_keystrokes("cooong", TELEX) == "coong"


class TestInventory:
    def test_size_covers_real_usage(self):
        assert len(sy.default_inventory()) >= 7000

    def test_render_parse_roundtrip_sample(self):
        for syl in sorted(sy.default_inventory())[::11]:
            assert parse(syl).render() == syl

    def test_override_path(self, tmp_path):
        path = tmp_path / "inv.txt"
        path.write_text("hà\nnội\n", encoding="utf-8")
        sy.set_default_inventory(path)
        try:
            assert not isinstance(sy.parse_syllable("hà"), sy.NotASyllable)
            assert isinstance(sy.parse_syllable("lội"), sy.NotASyllable)
        finally:
            sy.set_default_inventory(None)
