#!/usr/bin/env python3
"""Regenerate data/starter_corpus.json from permissively licensed sequential colormaps.

Each source colormap is sampled densely, trimmed to the L* range [15, 90]
(the extreme tips of the gamut are too narrow to survive seed alignment, and
trajectories are reconnected to white and black anyway), and stored as 32 hex
colors. Entries whose lightness is not strictly monotone are skipped. The
engine resamples to nine points on load.
"""
import json
import sys

import numpy as np
import matplotlib
matplotlib.use("Agg")
import seaborn  # noqa: F401  registers rocket/mako/flare/crest
import cmocean
import colorcet
import cmasher
import cmcrameri.cm as crameri
import palettable.cartocolors.sequential as carto
from skimage.color import rgb2lab

SAMPLES = 32
DENSE = 256
L_RANGE = (15.0, 90.0)

SOURCES = [
    ("ColorBrewer (Apache-2.0) via matplotlib",
     ["Greys", "Purples", "Blues", "Greens", "Oranges", "Reds", "YlOrBr", "YlOrRd",
      "OrRd", "PuRd", "RdPu", "BuPu", "GnBu", "PuBu", "YlGnBu", "PuBuGn", "BuGn", "YlGn"]),
    ("matplotlib perceptual maps (CC0)", ["viridis", "plasma", "inferno", "magma", "cividis"]),
    ("seaborn (BSD-3-Clause)", ["rocket", "mako", "flare", "crest"]),
    ("matplotlib (PSF-style license)", ["bone", "pink", "copper", "afmhot", "gist_heat", "summer"]),
    ("cmocean (MIT)", ["cmo." + n for n in
                       ["thermal", "haline", "solar", "ice", "oxy", "deep", "dense", "algae",
                        "matter", "turbid", "speed", "amp", "tempo", "rain", "gray"]]),
]

CRAMERI = ["acton", "bamako", "batlow", "batlowK", "batlowW", "bilbao", "buda", "davos",
           "devon", "glasgow", "grayC", "hawaii", "imola", "lajolla", "lapaz", "lipari",
           "navia", "nuuk", "oslo", "tokyo", "turku"]

CARTO = ["BluGrn", "BluYl", "BrwnYl", "Burg", "BurgYl", "DarkMint", "Emrld", "Magenta", "Mint",
         "OrYel", "Peach", "PinkYl", "Purp", "PurpOr", "RedOr", "Sunset", "SunsetDark", "Teal",
         "TealGrn"]

CMASHER = [n for n in cmasher.get_cmap_list("sequential") if not n.endswith("_r")]

CET = [k for k in colorcet.cm.keys()
       if k.startswith("linear_") and not k.endswith("_r")]


def to_entry(cid, source, cmap):
    rgb = cmap(np.linspace(0.0, 1.0, DENSE))[:, :3]
    lab = rgb2lab(rgb[np.newaxis, :, :])[0]
    keep = (lab[:, 0] >= L_RANGE[0]) & (lab[:, 0] <= L_RANGE[1])
    rgb, lab = rgb[keep], lab[keep]
    if len(rgb) < SAMPLES:
        return None
    pick = np.round(np.linspace(0, len(rgb) - 1, SAMPLES)).astype(int)
    rgb, lab = rgb[pick], lab[pick]
    d = np.diff(lab[:, 0])
    if not (np.all(d > 1e-3) or np.all(d < -1e-3)):
        return None
    hexes = ["#%02X%02X%02X" % tuple(int(round(c * 255)) for c in px) for px in rgb]
    return {"id": cid, "source": source, "colors": hexes}


def main(out):
    entries = []
    for source, names in SOURCES:
        for name in names:
            e = to_entry(name.replace("cmo.", "cmocean_"), source, matplotlib.colormaps[name])
            if e:
                entries.append(e)
    for name in CRAMERI:
        e = to_entry("crameri_" + name, "Scientific colour maps, F. Crameri (MIT)", crameri.cmaps[name])
        if e:
            entries.append(e)
    for name in CARTO:
        e = to_entry("carto_" + name, "CARTOColors (CC-BY-3.0) via palettable",
                     getattr(carto, name + "_7").mpl_colormap)
        if e:
            entries.append(e)
    for name in CMASHER:
        e = to_entry("cmr_" + name, "CMasher (BSD-3-Clause)", cmasher.cm.cmap_d[name])
        if e:
            entries.append(e)
    for name in sorted(CET):
        e = to_entry("cet_" + name, "colorcet (CC-BY-4.0)", colorcet.cm[name])
        if e:
            entries.append(e)
    doc = {"name": "starter", "colormaps": entries}
    with open(out, "w") as f:
        json.dump(doc, f, indent=1)
    print(f"wrote {len(entries)} colormaps to {out}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/starter_corpus.json")
