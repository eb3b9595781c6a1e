"""Fixed irreducible moduli for extension fields GF(p^m).

Generated once by the deterministic smallest-packed-value search
(:func:`quivergrade.gf.find_irreducible`); shipped as data so that every
run uses the same extension-field presentation.  Pairs outside the table
fall back to the same search at construction time.
"""

IRREDUCIBLE_MODULI = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 1, 0, 1, 1, 0, 0, 0, 1),
    (2, 9): (1, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 10): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1),
    (2, 11): (1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 12): (1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 13): (1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 14): (1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 15): (1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (2, 16): (1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 1, 0, 0, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (3, 6): (2, 1, 0, 0, 0, 0, 1),
    (3, 7): (2, 0, 1, 0, 0, 0, 0, 1),
    (3, 8): (2, 0, 1, 0, 0, 0, 0, 0, 1),
    (3, 9): (1, 0, 1, 2, 0, 0, 0, 0, 0, 1),
    (3, 10): (1, 0, 2, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 11): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 12): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 13): (1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 14): (2, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 15): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (3, 16): (1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (5, 4): (2, 0, 0, 0, 1),
    (5, 5): (1, 4, 0, 0, 0, 1),
    (5, 6): (2, 1, 0, 0, 0, 0, 1),
    (5, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (5, 8): (2, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 9): (3, 2, 1, 0, 0, 0, 0, 0, 0, 1),
    (5, 10): (3, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 11): (1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 12): (4, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 13): (2, 3, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 14): (2, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 15): (2, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (5, 16): (2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 2): (1, 0, 1),
    (7, 3): (2, 0, 0, 1),
    (7, 4): (1, 1, 0, 0, 1),
    (7, 5): (3, 1, 0, 0, 0, 1),
    (7, 6): (2, 0, 0, 0, 0, 0, 1),
    (7, 7): (1, 6, 0, 0, 0, 0, 0, 1),
    (7, 8): (3, 1, 0, 0, 0, 0, 0, 0, 1),
    (7, 9): (2, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 10): (3, 2, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 11): (3, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 12): (2, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 13): (3, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (7, 14): (4, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (11, 2): (1, 0, 1),
    (11, 3): (4, 1, 0, 1),
    (11, 4): (2, 1, 0, 0, 1),
    (11, 5): (2, 0, 0, 0, 0, 1),
    (11, 6): (2, 1, 0, 0, 0, 0, 1),
    (11, 7): (4, 1, 0, 0, 0, 0, 0, 1),
    (11, 8): (4, 1, 0, 0, 0, 0, 0, 0, 1),
    (11, 9): (5, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (11, 10): (3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (11, 11): (1, 10, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (13, 2): (2, 0, 1),
    (13, 3): (2, 0, 0, 1),
    (13, 4): (2, 0, 0, 0, 1),
    (13, 5): (2, 4, 0, 0, 0, 1),
    (13, 6): (2, 0, 0, 0, 0, 0, 1),
    (13, 7): (2, 3, 0, 0, 0, 0, 0, 1),
    (13, 8): (2, 0, 0, 0, 0, 0, 0, 0, 1),
    (13, 9): (2, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (13, 10): (9, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (17, 2): (3, 0, 1),
    (17, 3): (3, 1, 0, 1),
    (17, 4): (3, 0, 0, 0, 1),
    (17, 5): (3, 1, 0, 0, 0, 1),
    (17, 6): (7, 1, 0, 0, 0, 0, 1),
    (17, 7): (5, 1, 0, 0, 0, 0, 0, 1),
    (17, 8): (3, 0, 0, 0, 0, 0, 0, 0, 1),
    (17, 9): (3, 1, 0, 0, 0, 0, 0, 0, 0, 1),
    (19, 2): (1, 0, 1),
    (19, 3): (2, 0, 0, 1),
    (19, 4): (8, 1, 0, 0, 1),
    (19, 5): (3, 1, 0, 0, 0, 1),
    (19, 6): (4, 0, 0, 0, 0, 0, 1),
    (19, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (19, 8): (2, 1, 0, 0, 0, 0, 0, 0, 1),
    (19, 9): (2, 0, 0, 0, 0, 0, 0, 0, 0, 1),
    (23, 2): (1, 0, 1),
    (23, 3): (3, 1, 0, 1),
    (23, 4): (2, 1, 0, 0, 1),
    (23, 5): (3, 1, 0, 0, 0, 1),
    (23, 6): (15, 1, 0, 0, 0, 0, 1),
    (23, 7): (11, 5, 0, 0, 0, 0, 0, 1),
    (23, 8): (5, 1, 0, 0, 0, 0, 0, 0, 1),
    (29, 2): (2, 0, 1),
    (29, 3): (4, 1, 0, 1),
    (29, 4): (2, 0, 0, 0, 1),
    (29, 5): (8, 1, 0, 0, 0, 1),
    (29, 6): (3, 1, 0, 0, 0, 0, 1),
    (29, 7): (2, 0, 0, 0, 0, 0, 0, 1),
    (29, 8): (2, 0, 0, 0, 0, 0, 0, 0, 1),
    (31, 2): (1, 0, 1),
    (31, 3): (3, 0, 0, 1),
    (31, 4): (1, 1, 0, 0, 1),
    (31, 5): (2, 0, 0, 0, 0, 1),
    (31, 6): (5, 0, 0, 0, 0, 0, 1),
    (31, 7): (3, 1, 0, 0, 0, 0, 0, 1),
    (31, 8): (4, 1, 0, 0, 0, 0, 0, 0, 1),
    (37, 2): (2, 0, 1),
    (37, 3): (2, 0, 0, 1),
    (37, 4): (2, 0, 0, 0, 1),
    (37, 5): (5, 1, 0, 0, 0, 1),
    (37, 6): (2, 0, 0, 0, 0, 0, 1),
    (37, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (41, 2): (3, 0, 1),
    (41, 3): (1, 1, 0, 1),
    (41, 4): (3, 0, 0, 0, 1),
    (41, 5): (2, 0, 0, 0, 0, 1),
    (41, 6): (3, 1, 0, 0, 0, 0, 1),
    (41, 7): (3, 1, 0, 0, 0, 0, 0, 1),
    (43, 2): (1, 0, 1),
    (43, 3): (3, 0, 0, 1),
    (43, 4): (3, 1, 0, 0, 1),
    (43, 5): (7, 1, 0, 0, 0, 1),
    (43, 6): (6, 0, 0, 0, 0, 0, 1),
    (43, 7): (2, 0, 0, 0, 0, 0, 0, 1),
    (47, 2): (1, 0, 1),
    (47, 3): (4, 1, 0, 1),
    (47, 4): (5, 1, 0, 0, 1),
    (47, 5): (3, 1, 0, 0, 0, 1),
    (47, 6): (1, 1, 0, 0, 0, 0, 1),
    (47, 7): (3, 1, 0, 0, 0, 0, 0, 1),
    (53, 2): (2, 0, 1),
    (53, 3): (5, 1, 0, 1),
    (53, 4): (2, 0, 0, 0, 1),
    (53, 5): (10, 1, 0, 0, 0, 1),
    (53, 6): (7, 1, 0, 0, 0, 0, 1),
    (59, 2): (1, 0, 1),
    (59, 3): (1, 1, 0, 1),
    (59, 4): (1, 1, 0, 0, 1),
    (59, 5): (12, 1, 0, 0, 0, 1),
    (59, 6): (3, 1, 0, 0, 0, 0, 1),
    (61, 2): (2, 0, 1),
    (61, 3): (2, 0, 0, 1),
    (61, 4): (2, 0, 0, 0, 1),
    (61, 5): (2, 0, 0, 0, 0, 1),
    (61, 6): (2, 0, 0, 0, 0, 0, 1),
    (67, 2): (1, 0, 1),
    (67, 3): (2, 0, 0, 1),
    (67, 4): (1, 1, 0, 0, 1),
    (67, 5): (16, 1, 0, 0, 0, 1),
    (67, 6): (4, 0, 0, 0, 0, 0, 1),
    (71, 2): (1, 0, 1),
    (71, 3): (1, 1, 0, 1),
    (71, 4): (2, 1, 0, 0, 1),
    (71, 5): (2, 0, 0, 0, 0, 1),
    (71, 6): (2, 1, 0, 0, 0, 0, 1),
    (73, 2): (5, 0, 1),
    (73, 3): (2, 0, 0, 1),
    (73, 4): (5, 0, 0, 0, 1),
    (73, 5): (7, 1, 0, 0, 0, 1),
    (73, 6): (5, 0, 0, 0, 0, 0, 1),
    (79, 2): (1, 0, 1),
    (79, 3): (2, 0, 0, 1),
    (79, 4): (3, 1, 0, 0, 1),
    (79, 5): (8, 1, 0, 0, 0, 1),
    (79, 6): (2, 0, 0, 0, 0, 0, 1),
    (83, 2): (1, 0, 1),
    (83, 3): (5, 1, 0, 1),
    (83, 4): (3, 1, 0, 0, 1),
    (83, 5): (12, 1, 0, 0, 0, 1),
    (83, 6): (13, 1, 0, 0, 0, 0, 1),
    (89, 2): (3, 0, 1),
    (89, 3): (4, 1, 0, 1),
    (89, 4): (3, 0, 0, 0, 1),
    (89, 5): (3, 1, 0, 0, 0, 1),
    (89, 6): (5, 1, 0, 0, 0, 0, 1),
    (97, 2): (5, 0, 1),
    (97, 3): (2, 0, 0, 1),
    (97, 4): (5, 0, 0, 0, 1),
    (97, 5): (4, 1, 0, 0, 0, 1),
    (97, 6): (5, 0, 0, 0, 0, 0, 1),
    (101, 2): (2, 0, 1),
    (101, 3): (1, 1, 0, 1),
    (101, 4): (2, 0, 0, 0, 1),
    (101, 5): (2, 0, 0, 0, 0, 1),
    (101, 6): (3, 1, 0, 0, 0, 0, 1),
    (103, 2): (1, 0, 1),
    (103, 3): (2, 0, 0, 1),
    (103, 4): (5, 1, 0, 0, 1),
    (103, 5): (8, 1, 0, 0, 0, 1),
    (107, 2): (1, 0, 1),
    (107, 3): (1, 1, 0, 1),
    (107, 4): (2, 1, 0, 0, 1),
    (107, 5): (4, 1, 0, 0, 0, 1),
    (109, 2): (2, 0, 1),
    (109, 3): (3, 0, 0, 1),
    (109, 4): (2, 0, 0, 0, 1),
    (109, 5): (4, 1, 0, 0, 0, 1),
    (113, 2): (3, 0, 1),
    (113, 3): (1, 1, 0, 1),
    (113, 4): (3, 0, 0, 0, 1),
    (113, 5): (13, 1, 0, 0, 0, 1),
    (127, 2): (1, 0, 1),
    (127, 3): (3, 0, 0, 1),
    (127, 4): (3, 1, 0, 0, 1),
    (127, 5): (11, 1, 0, 0, 0, 1),
}
