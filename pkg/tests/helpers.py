from pathlib import Path

from failsec.dsl import parse

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def load(name):
    return parse((CORPUS / name).read_text(encoding="utf-8"))
