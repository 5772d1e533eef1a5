"""Regenerate the frozen fixture files shipped in src/detectllm/data/."""

from pathlib import Path

from detectllm.corpus import synthetic_sentences

DATA = Path(__file__).resolve().parents[1] / "src" / "detectllm" / "data"


def main():
    sentences = synthetic_sentences(50, seed=2024)
    (DATA / "sentences50.txt").write_text("\n".join(sentences) + "\n", encoding="utf-8")
    print(f"wrote {len(sentences)} sentences to {DATA / 'sentences50.txt'}")


if __name__ == "__main__":
    main()
