"""
Reference results used as test fixtures. All values are percentages.
"""

# Absolute EER of detector D01 in the male age study (teens .. 60s)
D01_MALE_AGE_EER = {
    "D_US-ts-M": 44.56,
    "D_US-20s-M": 46.49,
    "D_US-30s-M": 43.20,
    "D_US-40s-M": 41.98,
    "D_US-50s-M": 44.36,
    "D_US-60s-M": 57.87,
}
D01_MALE_AGE_DELTA_EER = {
    "D_US-ts-M": 2.57,
    "D_US-20s-M": 4.50,
    "D_US-30s-M": 1.22,
    "D_US-40s-M": 0.00,
    "D_US-50s-M": 2.37,
    "D_US-60s-M": 15.89,
}

# Absolute FPR1 of detector D02 in the male age study
D02_MALE_AGE_FPR1 = {
    "D_US-ts-M": 33.59,
    "D_US-20s-M": 27.01,
    "D_US-30s-M": 21.71,
    "D_US-40s-M": 26.03,
    "D_US-50s-M": 27.01,
    "D_US-60s-M": 28.61,
}
D02_MALE_AGE_DELTA_FPR1 = {
    "D_US-ts-M": 11.88,
    "D_US-20s-M": 5.30,
    "D_US-30s-M": 0.00,
    "D_US-40s-M": 4.32,
    "D_US-50s-M": 5.31,
    "D_US-60s-M": 6.90,
}

# Stuttering bona fide class: FPR1, FPR2, FPR3, EER per detector
STUTTERING = {
    "D01": (88.10, 96.54, 66.13, 34.10),
    "D02": (69.96, 96.77, 24.99, 18.16),
    "D03": (96.40, 95.58, 97.75, 47.19),
    "D04": (52.02, 53.09, 50.68, 22.40),
    "D05": (97.32, 98.53, 94.06, 49.05),
    "D06": (87.44, 83.41, 92.18, 46.94),
}
STUTTERING_MEAN = (81.87, 87.32, 70.97, 36.31)

# Pooled EER on the development and evaluation partitions
DEV_EER = {"D01": 0.74, "D02": 0.02, "D03": 0.71, "D04": 2.82, "D05": 0.04, "D06": 6.52}
EVAL_EER = {"D01": 1.62, "D02": 0.23, "D03": 10.10, "D04": 4.54, "D05": 3.67, "D06": 11.58}
DEV_EER_MEAN = 1.81
EVAL_EER_MEAN = 5.29
