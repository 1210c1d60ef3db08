#!/usr/bin/env python3
"""Independent reference computation of the fixture's golden tables.

Reads mail.mbox, vcs.log, lexicon.tsv and repomood.toml from this directory
and writes golden/{aggregates.csv, hml_tables.csv, developers.csv,
sentence_scores.csv, heatmap_fills.csv}. Needs Python 3.11+ (or the tomli package).
"""

import csv
import io
import mailbox
import math
import re
import statistics
from collections import defaultdict
from datetime import datetime, timezone
from email.utils import parseaddr, parsedate_to_datetime
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

HERE = Path(__file__).resolve().parent
GOLDEN = HERE / "golden"

# ---------------------------------------------------------------- lexicon


def load_lexicon(path):
    terms, boosters, negators = {}, {}, set()
    for line in path.read_text().splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        f = line.split("\t")
        toks = tokenize(f[1])
        if f[0] == "term":
            terms[tuple(toks)] = int(f[2])
        elif f[0] == "booster":
            boosters[toks[0]] = int(f[2])
        else:
            negators.add(toks[0])
    return terms, boosters, negators


def tokenize(text):
    return [t.lower() for t in re.split(r"[^0-9A-Za-z]+", text) if t]


def score(sentence, lex):
    terms, boosters, negators = lex
    toks = tokenize(sentence)
    longest = max((len(k) for k in terms), default=1)
    pos, neg = 1, -1
    i = 0
    while i < len(toks):
        hit = None
        for n in range(min(longest, len(toks) - i), 0, -1):
            if tuple(toks[i : i + n]) in terms:
                hit = (n, terms[tuple(toks[i : i + n])])
                break
        if hit is None:
            i += 1
            continue
        n, strength = hit
        mag = abs(strength)
        if i >= 1 and toks[i - 1] in boosters:
            mag = min(5, max(1, mag + boosters[toks[i - 1]]))
        negated = any(t in negators for t in toks[max(0, i - 2) : i])
        if strength > 0:
            if negated:
                neg = min(neg, -max(2, mag - 1))
            else:
                pos = max(pos, mag)
        elif not negated:
            neg = min(neg, -mag)
        i += n
    return pos, neg


def sentences(text):
    # terminator runs followed by whitespace or end of text
    out, start = [], 0
    for m in re.finditer(r"[.?!]+(?=\s|$)", text):
        piece = text[start : m.end()].strip()
        if piece:
            out.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


# ---------------------------------------------------------------- cleaning

GREETINGS = ["kind regards", "best regards"]
URL = ("http://", "https://", "ftp://", "www.")


def decode_entities(text):
    table = {"&amp;": "&", "&lt;": "<", "&gt;": ">", "&quot;": '"', "&apos;": "'"}
    return re.sub(r"&(amp|lt|gt|quot|apos);", lambda m: table[m.group(0)], text)


def is_code(line):
    if re.search(r"</?[A-Za-z][A-Za-z0-9:_-]*(\s[^<>]*)?/?>", line):
        return True
    if not line:
        return False
    sym = sum(1 for c in line if not c.isalnum() and not c.isspace())
    return sym / len(line) >= 0.30


def clean(body):
    lines = body.split("\n")
    for i, l in enumerate(lines):
        if l in ("--", "-- "):
            lines = lines[:i]
            break
    kept = []
    for l in lines:
        if l.lstrip().startswith(">"):
            continue
        toks = l.split()
        if any(t.lstrip("(<[\"'").lower().startswith(URL) for t in toks):
            rest = [t for t in toks if not t.lstrip("(<[\"'").lower().startswith(URL)]
            if not rest:
                continue
            indent = l[: len(l) - len(l.lstrip())]
            l = indent + " ".join(rest)
        if is_code(l):
            continue
        kept.append(l)
    while True:
        cut, after = None, 0
        for i in range(len(kept) - 1, -1, -1):
            s = kept[i].strip().lower()
            if not s:
                continue
            if any(s.startswith(g) and not s[len(g) : len(g) + 1].isalnum() for g in GREETINGS):
                cut = i
                break
            after += 1
            if after > 2:
                break
        if cut is None:
            break
        kept = kept[:cut]
    while kept and not kept[-1].strip():
        kept.pop()
    return "\n".join(kept)


# ---------------------------------------------------------------- corpus


def load_mail(lex):
    msgs = []
    for m in mailbox.mbox(str(HERE / "mail.mbox")):
        name, email = parseaddr(m["From"])
        date = parsedate_to_datetime(m["Date"]).astimezone(timezone.utc)
        body = m.get_payload()
        text = clean(decode_entities(body))
        scores = [(s, *score(s, lex)) for s in sentences(text)]
        msgs.append(
            {
                "id": m["Message-ID"].strip("<>"),
                "name": " ".join(name.split()),
                "email": email.lower(),
                "date": date,
                "scores": scores,
            }
        )
    return msgs


def load_commits():
    commits, cur = [], {}
    for line in (HERE / "vcs.log").read_text().splitlines():
        if not line.strip():
            continue
        if ":" in line and line.split(":", 1)[0] in ("hash", "parents", "author_name", "author_email",
                                                      "author_date", "committer", "committer_date"):
            tag, value = line.split(":", 1)
            if tag == "hash":
                cur = {}
            cur[tag] = value.strip()
            continue
        status, path = line.split("\t")
        when = datetime.fromisoformat(cur["author_date"]).astimezone(timezone.utc)
        head = next(s for s in path.split("/") if s and s != ".")
        commits.append(
            {
                "name": " ".join(cur["author_name"].split()),
                "email": cur["author_email"].lower(),
                "date": when,
                "head": head,
                "grain": head.split("-")[0],
            }
        )
    return commits


def identities(msgs, commits):
    obs, seen = [], {}
    for o in msgs + commits:
        key = (o["name"], o["email"])
        if key not in seen:
            seen[key] = len(obs)
            obs.append([key, o["date"]])
        else:
            obs[seen[key]][1] = min(obs[seen[key]][1], o["date"])
    parent = list(range(len(obs)))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for i, ((ni, ei), _) in enumerate(obs):
        for j in range(i):
            (nj, ej), _ = obs[j]
            if (ei and ei == ej) or (ni and ni.lower() == nj.lower()):
                parent[find(i)] = find(j)
    classes = defaultdict(list)
    for i in range(len(obs)):
        classes[find(i)].append(i)
    ordered = sorted(classes.values(), key=lambda ms: min((obs[i][1], i) for i in ms))
    ids, info = {}, []
    for idx, members in enumerate(ordered):
        members.sort(key=lambda i: (obs[i][1], i))
        email = next((obs[i][0][1] for i in members if obs[i][0][1]), "")
        name = next((obs[i][0][0] for i in members if obs[i][0][0]), email.split("@")[0])
        for i in members:
            ids[obs[i][0]] = idx
        info.append((name, email))
    return ids, info


# ---------------------------------------------------------------- analysis


def strong_neg(p, n):
    return n <= -3 and p <= 2


def strong_pos(p, n):
    return p >= 3 and n >= -2


def type7(values, q):
    v = sorted(values)
    h = (len(v) - 1) * q
    lo, hi = math.floor(h), math.ceil(h)
    return v[lo] + (h - lo) * (v[hi] - v[lo])


def zscores(xs):
    n = len(xs)
    if n < 2:
        return [0.0] * n
    mean = sum(xs) / n
    sd = math.sqrt(sum((x - mean) ** 2 for x in xs) / (n - 1))
    if sd == 0:
        return [0.0] * n
    return [(x - mean) / sd for x in xs]


def fmt(x):
    s = "%.6f" % x
    return "0.000000" if s == "-0.000000" else s


def hml(v, q1, q3):
    return "H" if v < q1 else ("M" if v <= q3 else "L")


def main():
    cfg = tomllib.loads((HERE / "repomood.toml").read_text())
    lex = load_lexicon(HERE / cfg["input"]["lexicon"])
    msgs = load_mail(lex)
    commits = load_commits()
    ids, info = identities(msgs, commits)
    for m in msgs:
        m["dev"] = ids[(m["name"], m["email"])]
        m["neg"] = any(strong_neg(p, n) for _, p, n in m["scores"])
        m["pos"] = any(strong_pos(p, n) for _, p, n in m["scores"])
        m["day"] = m["date"].date()
    for c in commits:
        c["dev"] = ids[(c["name"], c["email"])]
        c["day"] = c["date"].date()

    # per developer-year sentence counts
    yearly = defaultdict(lambda: [0, 0])
    for m in msgs:
        for _, p, n in m["scores"]:
            yearly[(m["dev"], m["day"].year)][0] += strong_neg(p, n)
            yearly[(m["dev"], m["day"].year)][1] += strong_pos(p, n)
    writers = {m["dev"] for m in msgs}
    max_neg = {d: max(v[0] for (dd, _), v in yearly.items() if dd == d) for d in writers}
    max_pos = {d: max(v[1] for (dd, _), v in yearly.items() if dd == d) for d in writers}
    dwn = {d for d in writers if max_neg[d] >= cfg["analysis"]["dwn_threshold"]}
    dwp = {d for d in writers if max_pos[d] >= cfg["analysis"]["dwp_threshold"]}

    # date join: each (key, day) with commits gets that day's message tally
    day_tally = defaultdict(lambda: [0, 0])
    for m in msgs:
        day_tally[m["day"]][0] += m["pos"]
        day_tally[m["day"]][1] += m["neg"]
    rows = []
    for kind, field in (("grain", "grain"), ("path", "head")):
        cells = {}
        commit_days = defaultdict(int)
        devs = defaultdict(lambda: (set(), set()))
        for c in commits:
            commit_days[(c[field], c["day"])] += 1
            if c["dev"] in dwn:
                devs[(c[field], c["day"].year)][0].add(c["dev"])
            if c["dev"] in dwp:
                devs[(c[field], c["day"].year)][1].add(c["dev"])
        for (key, day), n in commit_days.items():
            cell = cells.setdefault((key, day.year), {"pos": 0, "neg": 0, "commits": 0})
            cell["commits"] += n
            cell["pos"] += day_tally[day][0] if day in day_tally else 0
            cell["neg"] += day_tally[day][1] if day in day_tally else 0
        for (key, year), cell in cells.items():
            cell["dwn"] = len(devs[(key, year)][0])
            cell["dwp"] = len(devs[(key, year)][1])
        for year in sorted({y for _, y in cells}):
            keys = sorted(k for k, y in cells if y == year)
            zm = zscores([cells[(k, year)]["pos"] - cells[(k, year)]["neg"] for k in keys])
            zd = zscores([cells[(k, year)]["dwp"] - cells[(k, year)]["dwn"] for k in keys])
            for k, a, b in zip(keys, zm, zd):
                cells[(k, year)]["zm"] = a
                cells[(k, year)]["zd"] = b
        # windows: median over the window's years, then pooled quartiles
        windows = []
        for w in cfg["report"]["windows"]:
            lo, _, hi = w.partition("-")
            windows.append((w, int(lo), int(hi or lo)))
        meds = []
        for label, lo, hi in windows:
            for key in sorted({k for k, _ in cells}):
                vals = [cells[(key, y)] for y in range(lo, hi + 1) if (key, y) in cells]
                if vals:
                    meds.append((label, key, statistics.median(v["zd"] for v in vals),
                                 statistics.median(v["zm"] for v in vals)))
        dq1, dq3 = type7([m[2] for m in meds], 0.25), type7([m[2] for m in meds], 0.75)
        mq1, mq3 = type7([m[3] for m in meds], 0.25), type7([m[3] for m in meds], 0.75)
        for (key, year) in sorted(cells):
            c = cells[(key, year)]
            d, m = hml(c["zd"], dq1, dq3), hml(c["zm"], mq1, mq3)
            negc = (d, m) in (("H", "H"), ("H", "M"), ("M", "H"))
            rows.append([key, kind, year, c["pos"], c["neg"], c["commits"], c["dwp"], c["dwn"],
                         fmt(c["zm"]), fmt(c["zd"]), d, m, "true" if negc else "false"])
        for label, _, _ in windows:
            table = {(a, b): 0 for a in "HML" for b in "HML"}
            for lab, key, dv, mv in meds:
                if lab == label:
                    table[(hml(dv, dq1, dq3), hml(mv, mq1, mq3))] += 1
            HML_ROWS.append((kind, label, table))
        FILLS.extend((kind, key, year, cells[(key, year)]["zm"]) for key, year in sorted(cells))

    GOLDEN.mkdir(exist_ok=True)
    write_csv("aggregates.csv", ["key", "kind", "period", "n_pos_messages", "n_neg_messages", "n_commits",
                                 "n_dwp", "n_dwn", "diff_messages_z", "diff_devs_z", "dev_axis", "msg_axis",
                                 "negative_communication"], rows)

    hml_rows = []
    for kind, label, t in HML_ROWS:
        for d in "HML":
            r = [t[(d, m)] for m in "HML"]
            hml_rows.append([kind, label, d, *r, sum(r)])
        cols = [sum(t[(d, m)] for d in "HML") for m in "HML"]
        hml_rows.append([kind, label, "total", *cols, sum(cols)])
    write_csv("hml_tables.csv", ["kind", "period", "dev_axis", "msg_H", "msg_M", "msg_L", "total"], hml_rows)

    dev_rows = []
    months = defaultdict(set)
    ncommits = defaultdict(int)
    for c in commits:
        ncommits[c["dev"]] += 1
        months[c["dev"]].add((c["day"].year, c["day"].month))
    for d, (name, email) in enumerate(info):
        mine = [m for m in msgs if m["dev"] == d]
        n = len(mine)
        sn = sum(strong_neg(p, q) for m in mine for _, p, q in m["scores"])
        sp = sum(strong_pos(p, q) for m in mine for _, p, q in m["scores"])
        dev_rows.append([d, name, email, n, sn, sp, max_neg.get(d, 0), max_pos.get(d, 0),
                         fmt(sum(m["neg"] for m in mine) / n if n else 0.0),
                         fmt(sum(m["pos"] for m in mine) / n if n else 0.0),
                         ncommits[d], fmt(ncommits[d] / len(months[d])) if months[d] else "",
                         str(d in dwn).lower(), str(d in dwp).lower()])
    write_csv("developers.csv", ["id", "name", "email", "n_messages", "n_strong_neg_sentences",
                                 "n_strong_pos_sentences", "max_yearly_neg_sentences", "max_yearly_pos_sentences",
                                 "neg_message_ratio", "pos_message_ratio", "n_commits", "commits_per_active_month",
                                 "dwn", "dwp"], dev_rows)

    score_rows = [[m["id"], i, p, n] for m in msgs for i, (_, p, n) in enumerate(m["scores"])]
    write_csv("sentence_scores.csv", ["message_id", "sentence_index", "pos", "neg"], score_rows)

    fills = [[kind, key, year, fill(z)] for kind, key, year, z in FILLS]
    write_csv("heatmap_fills.csv", ["kind", "key", "year", "fill"], fills)


# ---------------------------------------------------------------- output

HML_ROWS = []
FILLS = []
NEG_RGB, NEUTRAL_RGB, POS_RGB = (0xB2, 0x18, 0x2B), (0xF7, 0xF7, 0xF7), (0x21, 0x66, 0xAC)


def fill(z):
    z = max(-3.0, min(2.0, z))
    if z < 0:
        target, t = NEG_RGB, z / -3.0
    elif z > 0:
        target, t = POS_RGB, z / 2.0
    else:
        target, t = NEUTRAL_RGB, 0.0
    # round half away from zero, as for non-negative channel values
    ch = [int(math.floor(a + (b - a) * t + 0.5)) for a, b in zip(NEUTRAL_RGB, target)]
    return "#%02x%02x%02x" % tuple(ch)


def write_csv(name, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    (GOLDEN / name).write_text(buf.getvalue())


if __name__ == "__main__":
    main()
