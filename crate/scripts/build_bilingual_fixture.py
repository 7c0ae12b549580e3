"""Regenerates fixtures/bilingual.

English text comes from documentation and sources that ship with Python and
the scientific stack; Korean text comes from korean_synth. Vocabularies are
trained with the vocadapt CLI, then one reference adaptation run records the
Korean improvement that the acceptance suite treats as its floor.

    python3 scripts/build_bilingual_fixture.py
"""

import glob
import hashlib
import inspect
import json
import os
import pathlib
import re
import subprocess
import sys
import tempfile

sys.path.insert(0, os.path.dirname(__file__))
from korean_synth import Generator  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures" / "bilingual"
CLI = [str(ROOT / "target" / "release" / "vocadapt")]

HELD_OUT_EVERY = 8
EN_TRAIN_CHARS = 1_800_000
KO_SHARE = 0.01
HELD_OUT_CAP = 90_000
REFERENCE_CHARS = 300_000


def held_out(text):
    return int(hashlib.sha256(text.encode()).hexdigest(), 16) % HELD_OUT_EVERY == 0


def clean(text):
    text = text.replace("\r\n", "\n")
    text = "\n".join(line.rstrip() for line in text.split("\n"))
    return re.sub(r"\n{3,}", "\n\n", text).strip()


def chunks(paragraphs, lo=300, hi=1500):
    buf = []
    size = 0
    for p in paragraphs:
        p = clean(p)
        if not p:
            continue
        buf.append(p)
        size += len(p)
        if size >= lo:
            yield "\n\n".join(buf)[:hi * 2]
            buf, size = [], 0
    if buf:
        yield "\n\n".join(buf)


def english_general():
    import pydoc_data.topics as topics
    import sklearn

    paras = []
    for key in sorted(topics.topics):
        paras.extend(topics.topics[key].split("\n\n"))
    for f in sorted(glob.glob(os.path.join(os.path.dirname(sklearn.__file__), "datasets", "descr", "*.rst"))):
        paras.extend(open(f, encoding="utf-8").read().split("\n\n"))
    return list(chunks(paras))


def english_code():
    docs = []
    for f in sorted(glob.glob(os.path.join(os.path.dirname(os.__file__), "*.py"))):
        lines = open(f, encoding="utf-8", errors="replace").read().split("\n")
        for i in range(0, len(lines), 60):
            body = clean("\n".join(lines[i:i + 60]))
            if len(body) > 200:
                docs.append(body)
    return docs


def english_stem():
    import numpy
    import numpy.linalg
    import scipy.linalg
    import scipy.optimize
    import scipy.special
    import scipy.stats
    import sympy

    seen = set()
    docs = []
    for mod in (scipy.stats, scipy.special, scipy.linalg, scipy.optimize, numpy, numpy.linalg, sympy):
        for name in sorted(dir(mod)):
            if name.startswith("_"):
                continue
            doc = inspect.getdoc(getattr(mod, name, None))
            if not doc or len(doc) < 200 or doc in seen:
                continue
            seen.add(doc)
            docs.append(clean(doc)[:4000])
    return docs


def korean(seed, n, stem):
    g = Generator(seed)
    return [g.document(stem=stem) for _ in range(n)]


def split(docs, cap):
    test, train = [], []
    for d in docs:
        (test if held_out(d) and sum(map(len, test)) < cap else train).append(d)
    return train, test


def take(docs, chars):
    out, size = [], 0
    for d in docs:
        if size >= chars:
            break
        out.append(d)
        size += len(d)
    return out


def write_jsonl(path, docs):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps({"text": d}, ensure_ascii=False) + "\n")


def run(*args):
    subprocess.run(CLI + [str(a) for a in args], check=True)


def main():
    subprocess.run(["cargo", "build", "--release", "-p", "vocadapt-cli"], cwd=ROOT, check=True)

    sources = {
        "en-general": english_general(),
        "en-code": english_code(),
        "en-stem": english_stem(),
    }
    train = {}
    for name, docs in sources.items():
        train[name], test = split(docs, HELD_OUT_CAP)
        write_jsonl(OUT / "domains" / name / "docs.jsonl", test)
    for name, seed, stem in (("ko-general", 1, False), ("ko-stem", 2, True)):
        write_jsonl(OUT / "domains" / name / "docs.jsonl", take(korean(seed, 2000, stem), HELD_OUT_CAP))
        train[name] = korean(seed + 100, 4000, stem)

    per_domain = EN_TRAIN_CHARS // 3
    en_train = [d for n in ("en-general", "en-code", "en-stem") for d in take(train[n], per_domain)]
    ko_train = [d for pair in zip(train["ko-general"], train["ko-stem"]) for d in pair]
    en_chars = sum(map(len, en_train))
    base_corpus = en_train + take(ko_train, int(en_chars * KO_SHARE / (1 - KO_SHARE)))

    reference = []
    for n in ("en-general", "en-code", "en-stem"):
        reference += take(train[n][len(take(train[n], per_domain)):], REFERENCE_CHARS // 3)
    write_jsonl(OUT / "reference" / "en.jsonl", reference)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        write_jsonl(tmp / "base.jsonl", base_corpus)
        write_jsonl(tmp / "donor.jsonl", ko_train)
        (OUT / "vocab").mkdir(parents=True, exist_ok=True)
        run("train", "--input", tmp / "base.jsonl", "--vocab-size", 8192, "--output", OUT / "vocab" / "base-8k.json")
        run("train", "--input", tmp / "donor.jsonl", "--vocab-size", 2048, "--output", OUT / "vocab" / "donor-2k.json")

        run("adapt", "--config", OUT / "adapt.toml", "--output", tmp / "adapted.json", "--plan", tmp / "plan.json")
        plan = json.loads((tmp / "plan.json").read_text())
    assert plan["status"] == "accepted", plan["guard_results"]
    gain = plan["target_gains"]["ko-general"]["improvement"]
    floor = int(gain * 10_000) / 10_000
    (OUT / "baseline.json").write_text(json.dumps({"ko-general": {"improvement": floor}}, indent=2) + "\n")
    print("guard:", plan["guard_results"])
    print("gains:", {k: round(v["improvement"], 4) for k, v in plan["target_gains"].items()})


if __name__ == "__main__":
    main()
