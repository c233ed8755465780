"""Certify (z^2 - z)/2 over Q_2 and print the certificate and first covers."""
from padicstab import RationalMap, omega_sequence
from padicstab.fileio import certificate_to_json, dumps
from padicstab.stability import j_stability_certificate


def main():
    f = RationalMap([0, -1, 1], [2])
    cert = j_stability_certificate(f, 2)
    print(dumps(certificate_to_json(cert)))
    for k, cover in enumerate(omega_sequence(f, cert.omega, 3)):
        print(f"Omega_{k}:", ", ".join(map(str, cover.balls)))


if __name__ == "__main__":
    main()
