#!/usr/bin/env python3
"""Regenerate the bundled test fixtures under tests/fixtures/.

The output is deterministic; rerunning overwrites the files with identical
content.
"""

import csv
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "tests", "fixtures")

# (id, name, description, children)
NODES = [
    ("/m/04rlf", "Music", "Music is an art form whose medium is sound.", ["/m/04szw"]),
    ("/m/04szw", "Musical instrument", "Sounds of objects made to produce music.",
     ["/m/0fx80y", "/m/0l14_3", "/m/0l14md", "/m/05148p4"]),
    ("/m/0fx80y", "Plucked string instrument", "String instruments played by plucking.",
     ["/m/0342h", "/m/0fd3y"]),
    ("/m/0342h", "Guitar", "A fretted string instrument with six strings.",
     ["/m/042v_gx", "/m/02sgy", "/m/018vs"]),
    ("/m/042v_gx", "Acoustic guitar", "A guitar producing sound acoustically through its hollow body.", []),
    ("/m/02sgy", "Electric guitar", "A guitar using pickups to convert string vibration to an electrical signal.", []),
    ("/m/018vs", "Bass guitar", "A guitar with a low pitch range.", []),
    ("/m/0fd3y", "Banjo", "A string instrument with a drum-like body.", []),
    ("/m/0l14_3", "Bowed string instrument", "String instruments sounded by a bow.",
     ["/m/07y_7", "/m/01xqw", "/m/02fsn", "/m/0d8_n"]),
    ("/m/07y_7", "Violin, fiddle", "The smallest and highest-pitched bowed string instrument.", []),
    ("/m/01xqw", "Cello", "A large bowed instrument played between the knees.", []),
    ("/m/02fsn", "Double bass", "The largest and lowest-pitched bowed string instrument.", []),
    ("/m/0d8_n", "String section", "A group of bowed string instruments playing together.", []),
    ("/m/0l14md", "Percussion", "Instruments sounded by being struck or scraped.",
     ["/m/02lkt", "/m/026t6", "/m/01qbl"]),
    ("/m/02lkt", "Drum kit", "A collection of drums and cymbals played by one person.", ["/m/01qbl"]),
    ("/m/026t6", "Drum", "A membrane stretched over a shell and struck.", ["/m/06rvn", "/m/0bm02"]),
    ("/m/06rvn", "Snare drum", "A drum with wires stretched across the lower head.", []),
    ("/m/0bm02", "Bass drum", "A large drum producing a low sound.", []),
    ("/m/01qbl", "Cymbal", "A thin round metal plate struck to make a crash.", []),
    ("/m/05148p4", "Keyboard (musical)", "Instruments played with a keyboard.", ["/m/05r5c"]),
    ("/m/05r5c", "Piano", "A keyboard instrument whose strings are struck by hammers.", []),
    ("/m/0jbk", "Animal", "Sounds produced by animals.", ["/m/068hy"]),
    ("/m/068hy", "Domestic animals, pets", "Sounds of animals kept at home.", ["/m/0bt9lr", "/m/01yrx"]),
    ("/m/0bt9lr", "Dog", "Sounds of a dog.", ["/m/05tny_", "/m/07r_k2n"]),
    ("/m/05tny_", "Bark", "The short loud cry of a dog.", []),
    ("/m/07r_k2n", "Yip", "A short high-pitched dog cry.", []),
    ("/m/01yrx", "Cat", "Sounds of a cat.", ["/m/07qrkrw", "/m/02yds9"]),
    ("/m/07qrkrw", "Meow", "The vocalisation of a domestic cat.", []),
    ("/m/02yds9", "Purr", "A low continuous vibrating sound made by a cat.", []),
    ("/m/0dgw9r", "Human sounds", "Sounds produced by the human body.", ["/m/0k65p"]),
    ("/m/0k65p", "Hands", "Sounds made with the hands.", ["/m/0l15bq", "/m/025_jnm"]),
    ("/m/0l15bq", "Clapping", "Striking the palms of the hands together.", []),
    ("/m/025_jnm", "Finger snapping", "A sharp sound made with the fingers.", []),
    ("/t/dd00071", "Domestic sounds, home sounds", "Sounds heard inside a home.", ["/m/02dgv", "/m/04brg2"]),
    ("/m/02dgv", "Door", "Sounds of a door.", ["/m/07r4wb8"]),
    ("/m/07r4wb8", "Knock", "Striking a door with the knuckles.", []),
    ("/m/04brg2", "Dishes, pots, and pans", "Sounds of kitchenware being handled.", []),
    ("/m/07rqsjt", "Whoosh, swoosh, swish", "The sound of something moving rapidly through air.", []),
]

LABELS10 = ["/m/042v_gx", "/m/02sgy", "/m/01xqw", "/m/02fsn", "/m/05tny_",
            "/m/07qrkrw", "/m/0l15bq", "/m/06rvn", "/m/05r5c", "/m/07r4wb8"]

CLASS_WORDS = {
    "/m/042v_gx": ["acoustic", "guitar", "strum", "folk", "fingerpicking"],
    "/m/02sgy": ["electric", "guitar", "riff", "distortion", "amp"],
    "/m/01xqw": ["cello", "bow", "strings", "orchestral", "classical"],
    "/m/02fsn": ["double", "bass", "pizzicato", "jazz", "upright"],
    "/m/05tny_": ["dog", "bark", "barking", "puppy", "animal"],
    "/m/07qrkrw": ["cat", "meow", "kitten", "pet", "animal"],
    "/m/0l15bq": ["clapping", "clap", "applause", "hands", "audience"],
    "/m/06rvn": ["snare", "drum", "roll", "percussion", "rimshot"],
    "/m/05r5c": ["piano", "keys", "chord", "grand", "melody"],
    "/m/07r4wb8": ["knock", "knocking", "door", "wood", "knuckles"],
}

FILLER = ["field-recording", "Recording", "sound", "SFX", "loop", "mono", "stereo",
          "zoom-h4n", "outdoor", "indoor", "Foley", "sample", "ambience",
          "noise", "city", "wind", "rain", "metal", "plastic", "machine"]

TEMPLATES = [
    "Recorded with a Zoom H4n at 44.1kHz, 24-bit. {w}!",
    "{w} -- recorded in my studio (2019).",
    "A short clip of {w}. Feel free to use it :)",
    "{w}; processed with EQ and compression, 3 takes.",
    "Sample #12: {w}...",
]


def ontology():
    return [{"id": i, "name": n, "description": d, "citation_uri": "",
             "positive_examples": [], "child_ids": c, "restrictions": []}
            for i, n, d, c in NODES]


def corpus(rng):
    clips = []
    clip_id = 100000
    for label in LABELS10:
        for _ in range(15):
            clip_id += rng.randint(1, 40)
            words = CLASS_WORDS[label]
            tags = rng.sample(words, rng.randint(1, 4)) + rng.sample(FILLER, rng.randint(0, 3))
            if rng.random() < 0.2:
                other = CLASS_WORDS[rng.choice(LABELS10)]
                tags.append(rng.choice(other))
            if rng.random() < 0.15:
                tags.append(" ".join(rng.sample(words, 2)))
            rng.shuffle(tags)
            desc_words = " ".join(w.capitalize() if rng.random() < 0.3 else w
                                  for w in rng.sample(words, rng.randint(0, 3)))
            desc = rng.choice(TEMPLATES).format(w=desc_words) if rng.random() < 0.85 else ""
            clips.append((clip_id, tags, desc, label))
    for _ in range(50):
        clip_id += rng.randint(1, 40)
        tags = rng.sample(FILLER, rng.randint(1, 5))
        if rng.random() < 0.3:
            tags.append(rng.choice(CLASS_WORDS[rng.choice(LABELS10)]))
        desc = rng.choice(TEMPLATES).format(w=" ".join(rng.sample(FILLER, 2)))
        clips.append((clip_id, tags, desc, None))
    rng.shuffle(clips)
    out = []
    for cid, tags, desc, _ in clips:
        out.append({
            "id": str(cid),
            "tags": tags,
            "description": desc,
            "duration": round(rng.uniform(0.3, 30.0), 3),
            "license": rng.choice(["http://creativecommons.org/publicdomain/zero/1.0/",
                                   "http://creativecommons.org/licenses/by/4.0/"]),
            "download_url": f"https://freesound.org/apiv2/sounds/{cid}/download/",
        })
    truth = sorted((cid, label) for cid, _, _, label in clips if label)
    return out, truth


def ancestors_chain(target):
    parents = {}
    for i, _, _, c in NODES:
        for ch in c:
            parents.setdefault(ch, []).append(i)
    out, stack = [], [target]
    while stack:
        n = stack.pop()
        if n in out:
            continue
        out.append(n)
        stack.extend(parents.get(n, []))
    return out


def gt_row(fname, leaves):
    names = {i: n for i, n, _, _ in NODES}
    mids = []
    for leaf in leaves:
        for m in ancestors_chain(leaf):
            if m not in mids:
                mids.append(m)
    labels = [names[m].replace(" ", "_") for m in mids]
    return fname, ",".join(labels), ",".join(mids)


def ground_truth(rng):
    plan = [  # class, train, val, eval
        ("/m/042v_gx", 60, 12, 22),
        ("/m/02sgy", 55, 10, 20),
        ("/m/05tny_", 70, 15, 25),
        ("/m/07qrkrw", 49, 12, 20),
        ("/m/01xqw", 52, 9, 13),
        ("/m/0342h", 20, 0, 0),
        ("/m/0l15bq", 16, 0, 0),
    ]
    dev, ev = [], []
    for label, tr, va, te in plan:
        dev += [(label, "train")] * tr + [(label, "val")] * va
        ev += [(label, None)] * te
    multi = [(("/m/05tny_", "/m/07qrkrw"), "train")] * 10 + \
            [(("/m/042v_gx", "/m/0l15bq"), "train")] * 6 + \
            [(("/m/02sgy", "/m/06rvn"), "val")] * 4
    rows = [((l,), s) for l, s in dev] + multi
    rng.shuffle(rows)
    rng.shuffle(ev)
    ids = rng.sample(range(1000, 400000), len(rows) + len(ev))
    dev_rows = [gt_row(ids[k], leaves) + (split,) for k, (leaves, split) in enumerate(rows)]
    eval_rows = [gt_row(ids[len(rows) + k], (l,)) for k, (l, _) in enumerate(ev)]
    return dev_rows, eval_rows


def main():
    rng = random.Random(20210721)
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "ontology.json"), "w") as f:
        json.dump(ontology(), f, indent=1)
        f.write("\n")
    with open(os.path.join(OUT, "labels_10.txt"), "w") as f:
        for label in sorted(LABELS10):
            f.write(label + "\n")
    with open(os.path.join(OUT, "corpus_200.jsonl"), "w") as f:
        records, truth = corpus(rng)
        for rec in records:
            f.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(os.path.join(OUT, "corpus_truth.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["clip_id", "label_id"])
        w.writerows(truth)
    dev, ev = ground_truth(rng)
    with open(os.path.join(OUT, "gt_dev.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["fname", "labels", "mids", "split"])
        w.writerows(dev)
    with open(os.path.join(OUT, "gt_eval.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["fname", "labels", "mids"])
        w.writerows(ev)
    # Small clean manifest for pipeline runs; the last class cannot be matched.
    names = {i: n for i, n, _, _ in NODES}
    rows, clip = [], 1
    for label, train in [("/m/042v_gx", 6), ("/m/02sgy", 8), ("/m/05tny_", 8),
                         ("/m/07qrkrw", 6), ("/m/01xqw", 20)]:
        for split, n in [("train", train), ("val", 2), ("test", 2)]:
            for _ in range(n):
                rows.append([str(clip), label, names[label], split])
                clip += 1
    with open(os.path.join(OUT, "clean_small.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["clip_id", "label_id", "label_name", "split"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
