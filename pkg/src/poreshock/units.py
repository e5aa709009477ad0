"""Unit conversions between CLI/paper units and the SI units used internally.

Everything inside the package is SI (m, s, kg, Pa, K, J/kg).  The command
line and the report files speak the units the figures are drawn in:
nanometers, picoseconds, GPa.  Note 1 nm/ps = 1000 m/s.
"""

NM = 1e-9            # m per nanometer
PS = 1e-12           # s per picosecond
GPA = 1e9            # Pa per gigapascal
NM_PER_PS = NM / PS  # m/s per nm/ps (= 1000)


def nm_to_m(x):
    return x * NM


def m_to_nm(x):
    return x / NM


def ps_to_s(x):
    return x * PS


def s_to_ps(x):
    return x / PS


def gpa_to_pa(x):
    return x * GPA


def pa_to_gpa(x):
    return x / GPA


def nmps_to_ms(x):
    """nm/ps to m/s."""
    return x * NM_PER_PS
