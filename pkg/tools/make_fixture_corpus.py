#!/usr/bin/env python3
"""Regenerate tests/fixtures/corpus_vi.txt (500 deterministic sentences).

The pools are chosen so that stripped forms of diacritic-bearing words
almost never collide with other fixture words; the few deliberate
ambiguities (mưa/mua, cà/cá) need sentence context to resolve, which is
exactly what the encoder is supposed to learn.
"""

import random
import sys
from pathlib import Path

SUBJECTS = [
    "tôi", "bạn", "mẹ", "bố", "anh trai", "chị gái", "em bé", "cô giáo",
    "bác sĩ", "học sinh", "người dân", "ông nội", "bà ngoại", "cậu bé",
]
VERB_PHRASES = [
    "đi học", "đi làm", "nấu cơm", "đọc sách", "viết thư", "xem phim",
    "chơi bóng đá", "uống cà phê", "trồng cây xanh", "rửa bát", "quét nhà",
    "tưới rau", "tặng quà", "bán hàng", "học bài", "nghe nhạc", "vẽ tranh",
    "câu cá", "thăm bạn bè", "dọn dẹp phòng", "sửa xe đạp", "nuôi mèo con",
    "gói bánh chưng", "làm việc", "tập thể dục", "kể chuyện vui",
]
PLACES = [
    "ở hà nội", "ở sài gòn", "ở trường", "ở nhà", "ngoài công viên",
    "trong bếp", "ở chợ quê", "trên núi cao", "bên bờ sông", "ở thư viện",
    "trong vườn", "ngoài sân", "ở biển", "dưới phố cổ",
]
TIMES = [
    "hôm nay", "ngày mai", "sáng sớm", "buổi chiều", "tối nay", "cuối tuần",
    "mùa hè", "mùa đông", "năm nay", "tháng sau", "mỗi ngày", "hôm qua",
]
EXTRAS = [
    "rất vui", "thật chăm chỉ", "cùng gia đình", "với bạn thân", "khá muộn",
    "từ rất sớm", "một cách cẩn thận", "sau giờ học", "trước bữa tối",
]
WEATHER = ["mưa to", "nắng gắt", "se lạnh", "nhiều mây", "có bão lớn", "rất đẹp"]

TEMPLATES = [
    "{time} {subj} {verb} {place}",
    "{subj} {verb} {place} {time}",
    "{time}, {subj} {verb} {extra}",
    "{subj} thích {verb} {extra}",
    "{time} trời {weather} nên {subj} {verb} {place}",
    "{subj} và {subj2} {verb} {time}",
]


def all_words() -> set[str]:
    words: set[str] = set()
    for pool in (SUBJECTS, VERB_PHRASES, PLACES, TIMES, EXTRAS, WEATHER):
        for phrase in pool:
            words.update(phrase.replace(",", " ").split())
    words.update({"trời", "nên", "và", "thích"})
    return words


def check_strip_collisions(words: set[str]) -> list[tuple[str, str]]:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
    from vispell.syllable import strip_diacritics

    collisions = []
    for w in sorted(words):
        s = strip_diacritics(w)
        if s != w and s in words:
            collisions.append((w, s))
    return collisions


def main() -> None:
    rng = random.Random(2024)
    lines: list[str] = []
    seen: set[str] = set()
    while len(lines) < 500:
        template = rng.choice(TEMPLATES)
        subj = rng.choice(SUBJECTS)
        subj2 = rng.choice([s for s in SUBJECTS if s != subj])
        line = template.format(
            subj=subj, subj2=subj2, verb=rng.choice(VERB_PHRASES),
            place=rng.choice(PLACES), time=rng.choice(TIMES),
            extra=rng.choice(EXTRAS), weather=rng.choice(WEATHER),
        )
        if line not in seen:
            seen.add(line)
            lines.append(line)

    out = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "corpus_vi.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")

    words = all_words()
    collisions = check_strip_collisions(words)
    print(f"wrote {len(lines)} sentences, {len(words)} distinct words -> {out}")
    print(f"strip collisions (context must disambiguate): {collisions}")


if __name__ == "__main__":
    main()
