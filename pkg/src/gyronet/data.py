"""Corpus and intent-dataset plumbing: streaming character ingestion, TSV
intent datasets with stratified splits, and a synthetic intent generator whose
composite classes induce a small label hierarchy."""

from __future__ import annotations

import codecs
from dataclasses import dataclass

import numpy as np


def ingest_corpus(path, keep_whitespace=False, chunk_size=1 << 16):
    """Stream the characters of a UTF-8 file, one Unicode scalar at a time.

    A leading BOM is stripped; whitespace characters are dropped unless
    ``keep_whitespace``.  Invalid UTF-8 raises with the byte offset; an empty
    result (after filtering) raises as well.  Constant memory in file size.
    """
    decoder = codecs.getincrementaldecoder("utf-8")()
    offset = 0
    seen_text = False
    yielded = False
    with open(path, "rb") as fh:
        while True:
            chunk = fh.read(chunk_size)
            final = not chunk
            try:
                text = decoder.decode(chunk, final)
            except UnicodeDecodeError as exc:
                raise ValueError(
                    f"{path}: invalid UTF-8 at byte offset {offset + exc.start}"
                ) from exc
            offset += len(chunk)
            if not seen_text and text:
                if text.startswith("\ufeff"):
                    text = text[1:]
                seen_text = True
            for ch in text:
                if not keep_whitespace and ch.isspace():
                    continue
                yielded = True
                yield ch
            if final:
                break
    if not yielded:
        raise ValueError(f"{path}: empty corpus")


@dataclass
class IntentDataset:
    records: list  # (utterance, label) pairs
    label_to_id: dict
    train_indices: list
    heldout_indices: list

    @property
    def id_to_label(self):
        inv = [None] * len(self.label_to_id)
        for label, i in self.label_to_id.items():
            inv[i] = label
        return inv

    def subset(self, indices):
        return [self.records[i] for i in indices]


def _stratified_split(records, label_to_id, holdout_fraction, seed):
    rng = np.random.default_rng(seed)
    by_label: dict[str, list[int]] = {}
    for i, (_, label) in enumerate(records):
        by_label.setdefault(label, []).append(i)
    train, heldout = [], []
    for label in sorted(by_label):
        idx = np.array(by_label[label])
        rng.shuffle(idx)
        n_hold = int(round(holdout_fraction * len(idx)))
        n_hold = min(n_hold, len(idx) - 1)  # never empty the training side
        heldout.extend(idx[:n_hold].tolist())
        train.extend(idx[n_hold:].tolist())
    train.sort()
    heldout.sort()
    for label, idx in by_label.items():
        if not any(i in set(train) for i in idx):
            raise ValueError(f"label '{label}' has no training examples after split")
    return train, heldout


def make_dataset(records, holdout_fraction=0.15, seed=0):
    labels = sorted({label for _, label in records})
    for _, label in records:
        if not label:
            raise ValueError("empty intent label")
    label_to_id = {label: i for i, label in enumerate(labels)}
    train, heldout = _stratified_split(records, label_to_id, holdout_fraction, seed)
    return IntentDataset(records, label_to_id, train, heldout)


def load_intent_dataset(path, holdout_fraction=0.15, seed=0):
    """TSV file, two columns: utterance TAB label; deterministic split."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[1]:
                raise ValueError(f"{path}:{lineno}: malformed line (expected 'utterance<TAB>label')")
            records.append((parts[0], parts[1]))
    if not records:
        raise ValueError(f"{path}: no records")
    return make_dataset(records, holdout_fraction, seed)


def save_intent_dataset(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for utterance, label in records:
            fh.write(f"{utterance}\t{label}\n")


def generate_synthetic_intents(num_classes, per_class, vocab_size, seed,
                               composites=2, noise_len=3,
                               holdout_fraction=0.15):
    """Desk-scale synthetic intent dataset.

    Each base class owns 2-4 disjoint signature characters; an utterance is a
    shuffled bag of its class signature plus random noise characters.
    ``composites`` of the classes are labelled "a+b" and mix the signatures of
    two base classes, giving the label set a hierarchical flavour.
    """
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if composites >= num_classes:
        raise ValueError("composites must leave at least two base classes")
    rng = np.random.default_rng(seed)
    num_base = num_classes - composites
    if composites > 0 and num_base < 2:
        raise ValueError("composite classes need at least two base classes")
    if composites > num_base * (num_base - 1) // 2:
        raise ValueError("not enough base-class pairs for the requested composites")
    pool = [chr(0x4E00 + i) for i in range(vocab_size)]
    sig_sizes = rng.integers(2, 5, size=num_base)
    total_sig = int(sig_sizes.sum())
    if total_sig + max(4, noise_len) > vocab_size:
        raise ValueError(
            f"vocab_size {vocab_size} too small for {num_base} disjoint signatures"
        )
    order = rng.permutation(vocab_size)
    cursor = 0
    signatures = []
    for size in sig_sizes:
        signatures.append([pool[j] for j in order[cursor:cursor + size]])
        cursor += size
    noise_pool = [pool[j] for j in order[cursor:]]

    classes = [(f"intent_{i}", signatures[i]) for i in range(num_base)]
    used_pairs = set()
    while len(classes) < num_classes:
        a, b = rng.choice(num_base, size=2, replace=False)
        pair = (int(min(a, b)), int(max(a, b)))
        if pair in used_pairs:
            continue
        used_pairs.add(pair)
        a, b = pair
        classes.append((f"intent_{a}+intent_{b}", signatures[a] + signatures[b]))

    records = []
    for label, signature in classes:
        for _ in range(per_class):
            chars = list(signature)
            chars.extend(rng.choice(len(noise_pool), size=noise_len))
            chars = [noise_pool[c] if isinstance(c, (int, np.integer)) else c for c in chars]
            perm = rng.permutation(len(chars))
            records.append(("".join(chars[i] for i in perm), label))
    return make_dataset(records, holdout_fraction, seed)
