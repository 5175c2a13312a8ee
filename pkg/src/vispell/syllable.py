"""Vietnamese syllable engine.

Decomposes syllables into onset / nucleus / coda / tone, strips and restores
diacritics, and converts between composed syllables and the raw key sequences
a typist would produce under the Telex or VNI input methods.

The engine is purely table-driven: a rime table (nucleus/coda split plus the
letter that carries the tone mark) and an onset compatibility rule define the
set of well-formed syllables.  The shipped inventory file is the onset x rime
x tone product generated from those same tables, so parsing, rendering and
keystroke round-trips are consistent by construction.

Tone marks are placed in the traditional position (``hòa``, ``khỏe``,
``thủy``); the "new style" placement (``hoà``) is not recognised as valid.
Telex is the mainstream variant: ``aa/ee/oo`` for circumflex, ``w`` for
breve/horn, ``dd`` for đ, tone key typed last.  The bare-``w`` shorthand for
``ư`` is not emitted or decoded.
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union


class Tone(enum.Enum):
    LEVEL = "level"
    ACUTE = "acute"
    GRAVE = "grave"
    HOOK = "hook"
    TILDE = "tilde"
    DOT = "dot"


class KeystrokeScheme(enum.Enum):
    TELEX = "telex"
    VNI = "vni"


# Combining code points for the five marked tones.
_TONE_COMBINING = {
    Tone.ACUTE: "́",
    Tone.GRAVE: "̀",
    Tone.HOOK: "̉",
    Tone.TILDE: "̃",
    Tone.DOT: "̣",
}
_COMBINING_TO_TONE = {v: k for k, v in _TONE_COMBINING.items()}

# Tone keys, typed after all letter keys.
_TELEX_TONE_KEY = {
    Tone.ACUTE: "s",
    Tone.GRAVE: "f",
    Tone.HOOK: "r",
    Tone.TILDE: "x",
    Tone.DOT: "j",
}
_VNI_TONE_KEY = {
    Tone.ACUTE: "1",
    Tone.GRAVE: "2",
    Tone.HOOK: "3",
    Tone.TILDE: "4",
    Tone.DOT: "5",
}

# Letter-quality keys (breve, circumflex, horn, stroke), typed right after
# the letter they modify.
_TELEX_LETTER_KEYS = {"â": "aa", "ê": "ee", "ô": "oo", "ă": "aw", "ơ": "ow", "ư": "uw", "đ": "dd"}
_VNI_LETTER_KEYS = {"â": "a6", "ê": "e6", "ô": "o6", "ă": "a8", "ơ": "o7", "ư": "u7", "đ": "d9"}

_MODIFIED_VOWELS = "ăâêôơư"
_PLAIN_VOWELS = "aeiouy"
_ALL_VOWELS = _PLAIN_VOWELS + _MODIFIED_VOWELS

_ONSETS = [
    "b", "c", "ch", "d", "đ", "g", "gh", "gi", "h", "k", "kh", "l", "m",
    "n", "ng", "ngh", "nh", "p", "ph", "qu", "r", "s", "t", "th", "tr",
    "v", "x",
]
# longest first: "ngh" must win over "ng", "gi" over "g"
_ONSETS_BY_LENGTH = sorted(_ONSETS, key=len, reverse=True) + [""]

_STOP_CODAS = {"c", "ch", "p", "t"}

# rime -> (nucleus, coda).  The rime string is the toneless written form;
# quality diacritics (ă â ê ô ơ ư) are part of it, the tone mark is not.
_RIME_SPLITS = {
    # a
    "a": ("a", ""), "ac": ("a", "c"), "ach": ("a", "ch"), "ai": ("a", "i"),
    "am": ("a", "m"), "an": ("a", "n"), "ang": ("a", "ng"), "anh": ("a", "nh"),
    "ao": ("a", "o"), "ap": ("a", "p"), "at": ("a", "t"), "au": ("a", "u"),
    "ay": ("a", "y"),
    # ă  (never open)
    "ăc": ("ă", "c"), "ăm": ("ă", "m"), "ăn": ("ă", "n"), "ăng": ("ă", "ng"),
    "ăp": ("ă", "p"), "ăt": ("ă", "t"),
    # â  (never open)
    "âc": ("â", "c"), "âm": ("â", "m"), "ân": ("â", "n"), "âng": ("â", "ng"),
    "âp": ("â", "p"), "ât": ("â", "t"), "âu": ("â", "u"), "ây": ("â", "y"),
    # e
    "e": ("e", ""), "ec": ("e", "c"), "em": ("e", "m"), "en": ("e", "n"),
    "eng": ("e", "ng"), "eo": ("e", "o"), "ep": ("e", "p"), "et": ("e", "t"),
    # ê
    "ê": ("ê", ""), "êch": ("ê", "ch"), "êm": ("ê", "m"), "ên": ("ê", "n"),
    "ênh": ("ê", "nh"), "êp": ("ê", "p"), "êt": ("ê", "t"), "êu": ("ê", "u"),
    # i
    "i": ("i", ""), "ia": ("ia", ""), "ich": ("i", "ch"), "im": ("i", "m"),
    "in": ("i", "n"), "inh": ("i", "nh"), "ip": ("i", "p"), "it": ("i", "t"),
    "iu": ("i", "u"),
    "iêc": ("iê", "c"), "iêm": ("iê", "m"), "iên": ("iê", "n"),
    "iêng": ("iê", "ng"), "iêp": ("iê", "p"), "iêt": ("iê", "t"),
    "iêu": ("iê", "u"),
    # o
    "o": ("o", ""), "oc": ("o", "c"), "oi": ("o", "i"), "om": ("o", "m"),
    "on": ("o", "n"), "ong": ("o", "ng"), "op": ("o", "p"), "ot": ("o", "t"),
    "ooc": ("oo", "c"), "oong": ("oo", "ng"),
    "oa": ("oa", ""), "oac": ("oa", "c"), "oach": ("oa", "ch"),
    "oai": ("oa", "i"), "oam": ("oa", "m"), "oan": ("oa", "n"),
    "oang": ("oa", "ng"), "oanh": ("oa", "nh"), "oao": ("oa", "o"),
    "oap": ("oa", "p"), "oat": ("oa", "t"), "oay": ("oa", "y"),
    "oăc": ("oă", "c"), "oăm": ("oă", "m"), "oăn": ("oă", "n"),
    "oăng": ("oă", "ng"), "oăp": ("oă", "p"), "oăt": ("oă", "t"),
    "oe": ("oe", ""), "oen": ("oe", "n"), "oeo": ("oe", "o"),
    "oet": ("oe", "t"),
    # ô
    "ô": ("ô", ""), "ôc": ("ô", "c"), "ôi": ("ô", "i"), "ôm": ("ô", "m"),
    "ôn": ("ô", "n"), "ông": ("ô", "ng"), "ôp": ("ô", "p"), "ôt": ("ô", "t"),
    # ơ
    "ơ": ("ơ", ""), "ơi": ("ơ", "i"), "ơm": ("ơ", "m"), "ơn": ("ơ", "n"),
    "ơp": ("ơ", "p"), "ơt": ("ơ", "t"),
    # u
    "u": ("u", ""), "uc": ("u", "c"), "ui": ("u", "i"), "um": ("u", "m"),
    "un": ("u", "n"), "ung": ("u", "ng"), "up": ("u", "p"), "ut": ("u", "t"),
    "ua": ("ua", ""),
    "uân": ("uâ", "n"), "uâng": ("uâ", "ng"), "uât": ("uâ", "t"),
    "uây": ("uâ", "y"),
    "uê": ("uê", ""), "uêch": ("uê", "ch"), "uênh": ("uê", "nh"),
    "uơ": ("uơ", ""),
    "uôc": ("uô", "c"), "uôi": ("uô", "i"), "uôm": ("uô", "m"),
    "uôn": ("uô", "n"), "uông": ("uô", "ng"), "uôt": ("uô", "t"),
    "uy": ("uy", ""), "uya": ("uya", ""), "uych": ("uy", "ch"),
    "uyên": ("uyê", "n"), "uyêt": ("uyê", "t"), "uyn": ("uy", "n"),
    "uynh": ("uy", "nh"), "uyp": ("uy", "p"), "uyt": ("uy", "t"),
    "uyu": ("uy", "u"),
    # ư
    "ư": ("ư", ""), "ưa": ("ưa", ""), "ưc": ("ư", "c"), "ưi": ("ư", "i"),
    "ưng": ("ư", "ng"), "ưt": ("ư", "t"), "ưu": ("ư", "u"),
    "ươc": ("ươ", "c"), "ươi": ("ươ", "i"), "ươm": ("ươ", "m"),
    "ươn": ("ươ", "n"), "ương": ("ươ", "ng"), "ươp": ("ươ", "p"),
    "ươt": ("ươ", "t"), "ươu": ("ươ", "u"),
    # y
    "y": ("y", ""), "yêm": ("yê", "m"), "yên": ("yê", "n"),
    "yêt": ("yê", "t"), "yêu": ("yê", "u"),
    "ynh": ("y", "nh"), "yt": ("y", "t"),
}

_FRONT = set("eêiy")
_BACK = set("aăâoôơuư")


def _tone_index(rime: str) -> int:
    """Index (within the rime) of the letter that carries the tone mark.

    Traditional placement: a quality-marked vowel wins (the last one, so
    ươ/uô/iê put the mark on the second element); otherwise the last nucleus
    vowel when a coda follows, else the penultimate vowel of an open rime.
    """
    nucleus, coda = _RIME_SPLITS[rime]
    marked = [i for i, c in enumerate(nucleus) if c in _MODIFIED_VOWELS]
    if marked:
        return marked[-1]
    if coda:
        return len(nucleus) - 1
    if len(nucleus) >= 2:
        return len(nucleus) - 2
    return 0


def _onset_rime_legal(onset: str, rime: str) -> bool:
    first = rime[0]
    if onset == "c":
        return first in _BACK or rime.startswith("oo")
    if onset == "k":
        return first in _FRONT and not rime.startswith("y")
    if onset == "qu":
        # The u glide is spelled inside the onset: quà, quốc, quyết, quýt.
        return first in set("aăâeêôơ") or first == "y"
    if onset in ("gh", "ngh"):
        return first in set("eêi")
    if onset == "ng":
        return first in _BACK
    if onset == "g":
        # g + i-rime is the written form of the gi onset: gì, gìn, giêng.
        # ia/iu are excluded: their tone would sit on the i, colliding with
        # the gi+a / gi+u spellings (già, giũ).
        return first in _BACK or (first == "i" and rime not in ("ia", "iu"))
    if onset == "gi":
        # già, giặc, giẻ, giễu, giỏi, giục; i/y-initial rimes go through g+i.
        return first in _BACK or first in "eê"
    if rime in ("ynh", "yt"):
        return onset == "qu"  # quỳnh, quýt; plus the zero onset handled above
    if rime.startswith("y") and rime != "y":
        return onset in ("", "qu")
    return True


def _legal_pairs() -> Iterable[tuple[str, str]]:
    for rime in _RIME_SPLITS:
        if _onset_rime_legal("", rime) and rime not in ("ynh", "yt"):
            yield "", rime
        for onset in _ONSETS:
            if _onset_rime_legal(onset, rime):
                yield onset, rime


def allowed_tones(rime: str) -> tuple[Tone, ...]:
    """Stop codas (c, ch, p, t) only combine with the acute and dot tones."""
    _, coda = _RIME_SPLITS[rime]
    if coda in _STOP_CODAS:
        return (Tone.ACUTE, Tone.DOT)
    return tuple(Tone)


def _place_tone(base: str, tone_pos: int, tone: Tone) -> str:
    if tone is Tone.LEVEL:
        return base
    mark = _TONE_COMBINING[tone]
    return unicodedata.normalize(
        "NFC", base[: tone_pos + 1] + mark + base[tone_pos + 1 :]
    )


def _extract_tone(s: str) -> tuple[Tone, str]:
    """Return (tone, toneless NFC form).  At most one tone mark is assumed."""
    tone = Tone.LEVEL
    kept = []
    for ch in unicodedata.normalize("NFD", s):
        t = _COMBINING_TO_TONE.get(ch)
        if t is not None:
            tone = t
        else:
            kept.append(ch)
    return tone, unicodedata.normalize("NFC", "".join(kept))


# ---------------------------------------------------------------------------
# Case patterns


def case_pattern(s: str) -> str:
    """Describe the casing of ``s``: 'lower', 'title', 'upper' or a 01-mask."""
    if s == s.lower():
        return "lower"
    if s == s.upper() and any(c.isalpha() for c in s):
        return "upper"
    if s == s[:1].upper() + s[1:].lower():
        return "title"
    return "".join("1" if c.isupper() else "0" for c in s)


def apply_case_pattern(s: str, pattern: str) -> str:
    if pattern == "lower":
        return s
    if pattern == "upper":
        return s.upper()
    if pattern == "title":
        return s[:1].upper() + s[1:]
    out = []
    for i, c in enumerate(s):
        bit = pattern[i] if i < len(pattern) else "0"
        out.append(c.upper() if bit == "1" else c)
    return "".join(out)


# ---------------------------------------------------------------------------
# Diacritic stripping

def _build_strip_table() -> dict[str, str]:
    drop = set(_TONE_COMBINING.values()) | {"̂", "̆", "̛"}
    table = {"đ": "d", "Đ": "D"}
    for base in "aeiouyAEIOUY":
        for mod in ("", "̂", "̆", "̛"):
            for tone in [""] + sorted(_TONE_COMBINING.values()):
                composed = unicodedata.normalize("NFC", base + mod + tone)
                if len(composed) != 1:
                    continue
                stripped = "".join(
                    c for c in unicodedata.normalize("NFD", composed) if c not in drop
                )
                if stripped != composed:
                    table[composed] = stripped
    return table


_STRIP_TABLE = _build_strip_table()


def strip_diacritics(s: str) -> str:
    """Remove tone marks and letter modifications (ô→o, ư→u, đ→d, ...).

    Only Vietnamese letters are touched; anything else passes through.
    """
    return "".join(_STRIP_TABLE.get(c, c) for c in s)


# ---------------------------------------------------------------------------
# Syllable type and parsing


@dataclass(frozen=True)
class Syllable:
    onset: str
    nucleus: str  # toneless written form, quality diacritics kept
    coda: str
    tone: Tone
    case: str = "lower"

    @property
    def rime(self) -> str:
        return self.nucleus + self.coda

    def render(self) -> str:
        base = self.onset + self.nucleus + self.coda
        pos = len(self.onset) + _tone_index(self.rime)
        return apply_case_pattern(_place_tone(base, pos, self.tone), self.case)


class NotASyllable:
    """Outcome value for tokens that are not well-formed Vietnamese syllables."""

    _instance: Optional["NotASyllable"] = None

    def __new__(cls) -> "NotASyllable":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:  # pragma: no cover
        return "NotASyllable"


NOT_A_SYLLABLE = NotASyllable()

ParseResult = Union[Syllable, NotASyllable]


def _split_base(base: str) -> Optional[tuple[str, str, str]]:
    """Split a toneless lowercase form into (onset, nucleus, coda)."""
    for onset in _ONSETS_BY_LENGTH:
        if not base.startswith(onset):
            continue
        rime = base[len(onset):]
        if rime in _RIME_SPLITS and _onset_rime_legal(onset, rime):
            nucleus, coda = _RIME_SPLITS[rime]
            return onset, nucleus, coda
    return None


def parse_syllable(token: str, inventory: Optional[frozenset] = None) -> ParseResult:
    """Decompose ``token`` or return NOT_A_SYLLABLE.

    Validation is against the shipped syllable inventory, so numbers, foreign
    words and misspellings (including new-style tone placement) are rejected.
    """
    if not token or any(c.isspace() for c in token):
        return NOT_A_SYLLABLE
    lower = unicodedata.normalize("NFC", token).lower()
    inv = inventory if inventory is not None else default_inventory()
    if lower not in inv:
        return NOT_A_SYLLABLE
    tone, base = _extract_tone(lower)
    split = _split_base(base)
    if split is None:
        return NOT_A_SYLLABLE
    onset, nucleus, coda = split
    return Syllable(onset, nucleus, coda, tone, case_pattern(token))


# ---------------------------------------------------------------------------
# Keystroke encoding / decoding


def _encode_letters(base: str, keys: dict[str, str]) -> str:
    out = []
    i = 0
    while i < len(base):
        c = base[i]
        # Two plain o's in a row (oong/ooc) need a third o under Telex so the
        # pair is not read back as ô.
        if keys is _TELEX_LETTER_KEYS and c == "o" and base[i : i + 2] == "oo":
            out.append("ooo")
            i += 2
            continue
        out.append(keys.get(c, c))
        i += 1
    return "".join(out)


def to_keystrokes(syl: Syllable, scheme: KeystrokeScheme) -> str:
    """Raw key sequence for ``syl`` with the input method disabled.

    Letter-quality keys sit right after their letter; the tone key comes
    last.  Output is lowercase; callers re-apply casing if they need it.
    """
    base = syl.onset + syl.nucleus + syl.coda
    if scheme is KeystrokeScheme.TELEX:
        letters = _encode_letters(base, _TELEX_LETTER_KEYS)
        tone = _TELEX_TONE_KEY.get(syl.tone, "")
    else:
        letters = _encode_letters(base, _VNI_LETTER_KEYS)
        tone = _VNI_TONE_KEY.get(syl.tone, "")
    return letters + tone


_TELEX_PAIRS = {"aa": "â", "ee": "ê", "oo": "ô", "aw": "ă", "ow": "ơ", "uw": "ư", "dd": "đ"}
_VNI_PAIRS = {"a6": "â", "e6": "ê", "o6": "ô", "a8": "ă", "o7": "ơ", "u7": "ư", "d9": "đ"}
_TELEX_TONE_FROM_KEY = {v: k for k, v in _TELEX_TONE_KEY.items()}
_VNI_TONE_FROM_KEY = {v: k for k, v in _VNI_TONE_KEY.items()}


def _decode_letters(letters: str, pairs: dict[str, str]) -> Optional[str]:
    out = []
    i = 0
    while i < len(letters):
        if pairs is _TELEX_PAIRS and letters[i : i + 3] == "ooo":
            out.append("oo")
            i += 3
            continue
        two = letters[i : i + 2]
        if two in pairs:
            out.append(pairs[two])
            i += 2
            continue
        c = letters[i]
        if not ("a" <= c <= "z"):
            return None
        out.append(c)
        i += 1
    return "".join(out)


def from_keystrokes(raw: str, scheme: KeystrokeScheme) -> str:
    """Compose a raw key sequence back into a syllable.

    Returns the composed surface form when the sequence decodes to a valid
    inventory syllable, the input unchanged otherwise (the ambiguous cases
    stay as typed, which is also what an input method leaves on screen).
    """
    if not raw:
        return raw
    lower = raw.lower()
    if scheme is KeystrokeScheme.TELEX:
        pairs, tone_keys = _TELEX_PAIRS, _TELEX_TONE_FROM_KEY
        level_key = "z"
    else:
        pairs, tone_keys = _VNI_PAIRS, _VNI_TONE_FROM_KEY
        level_key = "0"
    tone = Tone.LEVEL
    letters = lower
    if letters and letters[-1] in tone_keys:
        tone = tone_keys[letters[-1]]
        letters = letters[:-1]
    elif letters and letters[-1] == level_key:
        letters = letters[:-1]
    base = _decode_letters(letters, pairs)
    if base is None:
        return raw
    split = _split_base(base)
    if split is None:
        return raw
    onset, nucleus, coda = split
    rime = nucleus + coda
    if tone not in allowed_tones(rime):
        return raw
    composed = _place_tone(base, len(onset) + _tone_index(rime), tone)
    if composed not in default_inventory():
        return raw
    return apply_case_pattern(composed, case_pattern(raw))


# ---------------------------------------------------------------------------
# Inventory


def generate_inventory() -> list[str]:
    """All surface syllables from the onset x rime x tone product."""
    out = set()
    for onset, rime in _legal_pairs():
        base = onset + rime
        pos = len(onset) + _tone_index(rime)
        for tone in allowed_tones(rime):
            out.add(_place_tone(base, pos, tone))
    return sorted(out)


_DEFAULT_INVENTORY: Optional[frozenset] = None


def load_inventory(path: Optional[Union[str, Path]] = None) -> frozenset:
    """Load a one-syllable-per-line UTF-8 inventory file."""
    if path is None:
        text = (resources.files("vispell") / "data" / "syllables.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def default_inventory() -> frozenset:
    global _DEFAULT_INVENTORY
    if _DEFAULT_INVENTORY is None:
        _DEFAULT_INVENTORY = load_inventory()
    return _DEFAULT_INVENTORY


def set_default_inventory(path: Optional[Union[str, Path]]) -> None:
    """Override the inventory file used by parse/compose (None resets)."""
    global _DEFAULT_INVENTORY
    _DEFAULT_INVENTORY = load_inventory(path) if path is not None else None


@lru_cache(maxsize=4096)
def is_valid_syllable(token: str) -> bool:
    return not isinstance(parse_syllable(token), NotASyllable)
