#!/usr/bin/env python3
"""Regenerates the frozen test fixtures under tests/data from RDKit.

Run once; outputs are committed. Requires rdkit (pip install rdkit).
    python3 tests/fixtures_gen/make_fixtures.py
"""
import gzip
import json
import os
import pickle
import random
import sys

from rdkit import Chem, RDConfig, RDLogger
from rdkit.Chem import rdFingerprintGenerator

RDLogger.DisableLog("rdApp.*")

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.dirname(os.path.dirname(HERE))
OUT = os.path.join(ROOT, "tests", "data")
sys.path.append(os.path.join(RDConfig.RDContribDir, "SA_Score"))
import sascorer  # noqa: E402


def read_lines(name):
    with open(os.path.join(HERE, name)) as f:
        return [l.strip() for l in f if l.strip() and not l.startswith("#")]


def methyl_variants(smiles, limit):
    """Attach a methyl group at each symmetry-unique substitutable atom."""
    mol = Chem.MolFromSmiles(smiles)
    ranks = list(Chem.CanonicalRankAtoms(mol, breakTies=False))
    seen, out = set(), []
    for atom in mol.GetAtoms():
        if atom.GetTotalNumHs() == 0 or ranks[atom.GetIdx()] in seen:
            continue
        seen.add(ranks[atom.GetIdx()])
        rw = Chem.RWMol(mol)
        c = rw.AddAtom(Chem.Atom(6))
        rw.AddBond(atom.GetIdx(), c, Chem.BondType.SINGLE)
        try:
            m = rw.GetMol()
            Chem.SanitizeMol(m)
        except Exception:
            continue
        out.append(Chem.MolToSmiles(m))
        if len(out) >= limit:
            break
    return out


def morgan_bits(mol, radius, width):
    gen = rdFingerprintGenerator.GetMorganGenerator(radius=radius, fpSize=width)
    return list(gen.GetFingerprint(mol).GetOnBits())


def main():
    rng = random.Random(20240611)
    seeds = read_lines("corpus_seed.txt") + read_lines("acceptors.txt")
    corpus = list(seeds)
    for s in ["c1ccc2c(c1)sc1ccccc12", "c1ccc2nsnc2c1", "c1cc2cc3sccc3cc2s1",
              "O=C1c2ccccc2C(=CC)C1=C(C#N)C#N", "c1ccc2c(c1)[nH]c1ccccc12",
              "c1ccc2ccccc2c1", "c1ccncc1", "c1csc(c1)-c1cccs1", "O=c1cccc[nH]1",
              "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "c1ccc(-c2ccccc2)cc1",
              "c1cc2ccc3cccc4ccc(c1)c2c34", "c1ccc2c(c1)C(=O)c1ccccc1C2=O", "c1cc[nH]c1", "c1ccoc1"]:
        corpus += methyl_variants(s, 8)
    uniq, keys = [], set()
    for s in corpus:
        m = Chem.MolFromSmiles(s)
        assert m is not None, s
        if s in keys:
            continue
        keys.add(s)
        uniq.append(s)

    rows = []
    for s in uniq:
        m = Chem.MolFromSmiles(s)
        perms = [Chem.MolToSmiles(m, doRandom=True, canonical=False) for _ in range(3)]
        rows.append({
            "smiles": s,
            "rdkit": Chem.MolToSmiles(m),
            "heavy": m.GetNumHeavyAtoms(),
            "atoms": m.GetNumAtoms(),
            "aromatic_atoms": sum(a.GetIsAromatic() for a in m.GetAtoms()),
            "total_h": sum(a.GetTotalNumHs() for a in m.GetAtoms()),
            "permuted": perms,
            "morgan2": morgan_bits(m, 2, 2048),
        })
    with open(os.path.join(OUT, "smiles_corpus.jsonl"), "w") as f:
        for r in rows:
            f.write(json.dumps(r) + "\n")

    negatives = [
        ("C1CC", "GrammarError"), ("C(C", "GrammarError"), ("CC)", "GrammarError"),
        ("[CH4", "GrammarError"), ("C%1C", "GrammarError"), ("Xx", "GrammarError"),
        ("C==C", "GrammarError"), ("", "GrammarError"), ("C1CC2", "GrammarError"),
        ("C(C)(C)(C)(C)C", "ValenceError"), ("O(C)(C)C", "ValenceError"),
        ("FC(F)(F)(F)F", "ValenceError"), ("C=C=C=C(C)(C)C", "ValenceError"), ("[NH4]", "ValenceError"),
        ("N(C)(C)(C)C", "ValenceError"), ("ClCl(Cl)", "ValenceError"),
        ("c1cccc1", "AromaticityError"), ("c1ccccc1c", "AromaticityError"),
        ("c", "AromaticityError"), ("c1ccc2ccccc2c1c", "AromaticityError"),
        ("c1cccnc1C", None), ("c1ccc1", None),
    ]
    with open(os.path.join(OUT, "smiles_negative.tsv"), "w") as f:
        for s, kind in negatives:
            ok = Chem.MolFromSmiles(s) is not None if s else False
            if kind is None:
                assert ok, s
            else:
                assert not ok, s
            f.write(f"{s}\t{kind or 'OK'}\n")

    sa_smiles = [
        "CCO", "c1ccccc1", "CC(=O)Nc1ccc(O)cc1", "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
        "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "OC[C@H]1OC(O)[C@H](O)[C@@H](O)[C@@H]1O",
        "CN1CCC[C@H]1c1cccnc1", "C12CCC(CC1)CC2", "C1CC11CC1", "C1CCCCCCCCC1",
        "C12C3C4C1C5C2C3C45", "O=S(=O)(O)c1ccccc1", "c1ccc2c(c1)sc1ccccc12",
        "Fc1cc2c(cc1F)C(=O)C(=C)C2=C(C#N)C#N", "CCCCCCCCc1cc(-c2ccc(-c3ccc(C)s3)c3nsnc23)sc1",
        "Cc1cc2c(s1)c1sc(C)cc1[Si]2(CC)CC", "[Na+].[Cl-]",
    ] + read_lines("acceptors.txt")[:3]
    with open(os.path.join(OUT, "sascore_fixtures.tsv"), "w") as f:
        for s in sa_smiles:
            m = Chem.MolFromSmiles(s)
            f.write(f"{s}\t{sascorer.calculateScore(m):.6f}\n")

    table = pickle.load(gzip.open(os.path.join(RDConfig.RDContribDir, "SA_Score", "fpscores.pkl.gz")))
    scores = {}
    for row in table:
        for frag in row[1:]:
            scores[frag] = float(row[0])
    dest = os.path.join(ROOT, "data", "sascore")
    os.makedirs(dest, exist_ok=True)
    with gzip.open(os.path.join(dest, "fpscores.tsv.gz"), "wt", compresslevel=9) as f:
        for frag in sorted(scores):
            f.write(f"{frag}\t{scores[frag]:.4f}\n")
    print(f"corpus {len(rows)}, sa {len(sa_smiles)}, table {len(scores)}")


if __name__ == "__main__":
    main()
