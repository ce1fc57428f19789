"""Reference structures and values published for the house-front study.

These serve as regression fixtures and as the default inputs of the
``pipeline`` command.
"""

INITIAL_MODEL = "[B][T][C][RF][DO][PL][DC|B:T:C][MD|DC:RF:DO:PL][TR|DC][CE|MOD:TR]"

INITIAL_ARCS = (
    ("B", "DC"),
    ("T", "DC"),
    ("C", "DC"),
    ("RF", "MD"),
    ("PL", "MD"),
    ("DO", "MD"),
    ("DC", "TR"),
    ("DC", "MD"),
    ("TR", "CE"),
    ("MD", "CE"),
)

INITIAL_BIC = -979.0649
INITIAL_BDEU = -552.611

# (label, BIC score, model string); the first twelve were printed with a space
# in place of "|" and are normalised here.
CANDIDATES = (
    ("M1", -527.5334019, "[MD][PL][T][TR|MD][B|TR][RF|TR][C|RF][DC|B][DO|RF][CE|DO]"),
    ("M2", -525.1395526, "[B][DO][PL][T][DC|B][CE|DC][RF|DC][C|RF][TR|C][MD|TR]"),
    ("M3", -528.9434423, "[C][PL][RF][DO|RF][MD|RF][TR|RF][CE|DO][DC|TR][B|DC][T|B]"),
    ("M4", -519.0916518, "[B][MD][PL][T][DC|B][RF|DC][CE|RF][DO|RF][TR|RF][C|TR]"),
    ("M5", -521.5010174, "[MD][PL][T][TR|MD][B|TR][C|TR][DC|TR][CE|DC][RF|DC][DO|RF]"),
    ("M6", -521.5731987, "[MD][PL][TR|MD][DC|TR][B|DC][C|DC][CE|DC][RF|DC][DO|RF][T|B]"),
    ("M7", -517.3542449, "[B][DO][PL][T][DC|B][C|DC][CE|DC][RF|DC][TR|DC][MD|TR]"),
    ("M8", -519.8741391, "[B][T][DC|B][C|DC][MD|DC][RF|DC][TR|DC][CE|RF][DO|RF][PL|MD]"),
    ("M9", -523.3763526, "[B][PL][DC|B][T|B][C|DC][CE|DC][MD|DC][RF|DC][TR|DC][DO|RF]"),
    ("M10", -522.0605958, "[B][PL][T][C|T][DC|B][RF|DC][CE|RF][DO|RF][TR|RF][MD|TR]"),
    ("M11", -524.8840612, "[C][DO][MD][PL][T][TR|C][B|TR][DC|TR][CE|DC][RF|DC]"),
    ("M12", -526.1012981, "[B][MD][PL][T][TR|MD][C|TR][DC|TR][DO|TR][CE|DC][RF|DC]"),
    ("M13", -517.126813, "[B][C][DO][PL][T][DC|B][CE|DC][RF|DC][TR|RF][MD|TR]"),
    ("M14", -531.6963744, "[PL][T][C|T][TR|C][B|TR][RF|TR][CE|RF][DC|B][DO|RF][MD|DC]"),
    ("M15", -527.3729879, "[B][DC|B][C|DC][MD|DC][RF|DC][TR|DC][CE|RF][DO|RF][T|C][PL|DO]"),
    ("M16", -530.1548123, "[B][DC|B][T|B][PL|DC][RF|DC][DO|RF][TR|RF][C|TR][MD|TR][CE|MD]"),
    ("M17", -530.3505663, "[DC][CE|DC][MD|DC][RF|DC][TR|DC][B|TR][C|TR][DO|RF][PL|MD][T|B]"),
    ("M18", -527.3428835, "[B][DC|B][C|DC][TR|DC][MD|TR][RF|TR][T|C][CE|RF][DO|RF][PL|MD]"),
    ("M19", -528.3939493, "[PL][MD|PL][TR|MD][B|TR][DC|B][T|B][C|DC][CE|DC][RF|DC][DO|RF]"),
    ("M20", -529.9446029, "[MD][TR|MD][B|TR][C|TR][DC|B][PL|B][T|B][RF|DC][CE|RF][DO|RF]"),
    ("M21", -531.4081897, "[B][T][C|T][DC|B][MD|DC][RF|DC][CE|RF][DO|MD][PL|MD][TR|MD]"),
)

TOP_FIVE = ("M13", "M7", "M4", "M8", "M5")

# Arc-strength p-values of the initial model, Pearson criterion.
INITIAL_ARC_STRENGTH_X2 = {
    ("B", "DC"): 9.763066e-01,
    ("T", "DC"): 1.000000e00,
    ("C", "DC"): 9.999153e-01,
    ("RF", "MD"): 1.000000e00,
    ("PL", "MD"): 1.000000e00,
    ("DO", "MD"): 1.000000e00,
    ("DC", "TR"): 3.093218e-08,
    ("DC", "MD"): 1.000000e00,
    ("TR", "CE"): 7.989842e-01,
    ("MD", "CE"): 9.174464e-01,
}

# (x, y, given, kind) -> (statistic, df, p-value)
CI_TESTS = {
    ("CE", "DC", ("B",), "mi"): (21.477, 12, 0.04381),
    ("CE", "DC", ("B",), "x2"): (19.145, 12, 0.08509),
    ("CE", "RF", ("DC",), "mi"): (15.966, 12, 0.1928),
    ("CE", "RF", ("DC",), "x2"): (25.327, 12, 0.01335),
}


def candidate(label: str) -> str:
    for name, _, text in CANDIDATES:
        if name == label:
            return text
    raise KeyError(label)
