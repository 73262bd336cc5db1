CHECKS = {
    "minimality": {
        "command": "check-minimality",
        "description": "Seeded rank-one variations against the extremum-ball inequality",
        "report": "minimality.json",
    },
    "falsify": {
        "command": "falsify",
        "description": "Search for a competitor with a smaller supremal energy",
        "report": "falsify.json",
    },
    "convexity": {
        "command": "convexity-check",
        "description": "Rank-one level-convexity sampling of H and of its sections",
        "report": "convexity.json",
    },
    "residual": {
        "command": "residual",
        "description": "Infinity-Laplace / HJ residual sweep with observed order",
        "report": "residual.json",
    },
    "mollify-demo": {
        "command": "mollify-demo",
        "description": "Shell mollification against the ring-wise modulus bounds",
        "report": "mollify.json",
    },
    "jensen": {
        "command": "jensen",
        "description": "Jensen inequality for level-convex sections of H",
        "report": "jensen.json",
    },
}

PLOT_FILES = {
    "margins": {
        "file": "margins.csv",
        "columns": ["trial", "margin", "tol"],
    },
    "mollify": {
        "file": "mollify.csv",
        "columns": ["l", "epsilon", "measured", "bound"],
    },
    "residual": {
        "file": "residual.csv",
        "columns": ["h", "sup_residual"],
    },
    "residual-map": {
        "file": "residual_map.csv",
        "columns": ["x1", "...", "residual", "flagged"],
    },
}

DEFAULT_OUT_DIR = "supremal-out"

GALLERY_COLUMNS = ["name", "dims", "smoothness", "singular_set", "facts"]
