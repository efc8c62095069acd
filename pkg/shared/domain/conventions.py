# Convenciones físicas y numéricas (se citan en manifiestos y cabeceras CSV)

UNITS = "hbar=1; H_free=|K|^2; free shear (q,p)->(q+t*p,p)"

WEYL_CONVENTION = "phi(q,p)=Tr[exp(i q.K + i p.X) rho]"

MEASURE_CONVENTION = "measure=(2pi)^-d dq dp"

BLOCK_PAIRING = "q-slot<->x-blocks: l(q,p)=-1/2<(q,p)|A(q,p)>+psi(q,p); B^{k,k} pairs with q"

EXPONENT_CONVENTION = "integrated exponent=int_0^t l(q+u*p,p) du"

CONVENTION_HEADER = {
    "units": UNITS,
    "weyl": WEYL_CONVENTION,
    "normalization": MEASURE_CONVENTION,
    "block_pairing": BLOCK_PAIRING,
    "exponent": EXPONENT_CONVENTION,
}
