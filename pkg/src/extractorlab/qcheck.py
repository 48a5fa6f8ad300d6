"""Small-dimension quantum numerics.

Density matrices carry named registers so marginals can be taken by name.
Spectral calls always symmetrise first; eigenvalues between -1e-10 and 0
are clipped and anything more negative is an error.

The two-wise-extractor check (``verify_thm31``) is computed by two routes:
a classical-quantum route that conditions on x and y and applies the
postselected Kraus operators directly, and a state-vector route that builds
the canonical purifications and the Stinespring isometries on the full
space.  ``verify_thm31`` uses the first; ``thm31_statevector`` is the
second and the tests compare them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .xtr import TwoWiseSpec

__all__ = [
    "QuantumError",
    "DensityMatrix",
    "CQState",
    "PostselectedMap",
    "partial_trace",
    "trace_distance",
    "dmax",
    "hmin_mod",
    "collision_gamma",
    "renyi2_sandwiched",
    "verify_renner_ip",
    "Thm31Instance",
    "verify_thm31",
    "thm31_statevector",
    "haar_isometry",
    "haar_state",
    "random_density",
    "random_cq_state",
    "random_channel",
    "random_thm31_instance",
    "trivial_thm31_instance",
    "y_zero_thm31_instance",
    "apply_channel",
]

HERM_TOL = 1e-10
EIG_TOL = 1e-10
RANK_TOL = 1e-10


class QuantumError(ValueError):
    pass


def _herm(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def _eigh(a: np.ndarray, psd: bool = False):
    w, v = np.linalg.eigh(_herm(a))
    if psd:
        if w.min(initial=0.0) < -EIG_TOL:
            raise QuantumError(f"matrix is not positive semidefinite (eigenvalue {w.min():.3e})")
        w = np.clip(w, 0.0, None)
    return w, v


def _mpow(a: np.ndarray, power: float) -> np.ndarray:
    """``a^power`` on the support of a PSD matrix (pseudo-inverse for negative powers)."""
    w, v = _eigh(a, psd=True)
    keep = w > RANK_TOL
    wp = np.zeros_like(w)
    wp[keep] = w[keep] ** power
    return (v * wp) @ v.conj().T


def _support(a: np.ndarray) -> np.ndarray:
    w, v = _eigh(a, psd=True)
    vs = v[:, w > RANK_TOL]
    return vs @ vs.conj().T


@dataclass(frozen=True)
class DensityMatrix:
    """A state on the tensor product of ``registers`` (``(name, dim)`` pairs, left to right)."""

    data: np.ndarray = field(repr=False)
    registers: tuple = ()

    def __post_init__(self):
        a = np.asarray(self.data, dtype=complex)
        regs = tuple((str(n), int(d)) for n, d in self.registers) or (("A", a.shape[0]),)
        dim = math.prod(d for _, d in regs)
        if a.shape != (dim, dim):
            raise QuantumError(f"shape {a.shape} does not match register dimensions {dim}")
        if len({n for n, _ in regs}) != len(regs):
            raise QuantumError("duplicate register names")
        if np.abs(a - a.conj().T).max(initial=0.0) > HERM_TOL:
            raise QuantumError("matrix is not Hermitian")
        _eigh(a, psd=True)
        if abs(np.trace(a).real - 1) > HERM_TOL:
            raise QuantumError(f"trace is {np.trace(a).real}, not 1")
        object.__setattr__(self, "data", _herm(a))
        object.__setattr__(self, "registers", regs)

    @classmethod
    def pure(cls, psi, registers=()) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), registers)

    @classmethod
    def diag(cls, probs, name: str = "X") -> DensityMatrix:
        probs = np.asarray([float(p) for p in probs])
        return cls(np.diag(probs).astype(complex), ((name, len(probs)),))

    @classmethod
    def maximally_mixed(cls, dim: int, name: str = "A") -> DensityMatrix:
        return cls(np.eye(dim, dtype=complex) / dim, ((name, dim),))

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.registers)

    @property
    def dims(self) -> tuple:
        return tuple(d for _, d in self.registers)

    def tensor(self, other: DensityMatrix) -> DensityMatrix:
        return DensityMatrix(np.kron(self.data, other.data), self.registers + other.registers)

    def ptrace(self, keep: Sequence[str]) -> DensityMatrix:
        return partial_trace(self, keep)


def _ptrace_array(a: np.ndarray, dims: Sequence[int], keep_idx: Sequence[int]) -> np.ndarray:
    k = len(dims)
    t = a.reshape(tuple(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * k > len(letters):
        raise QuantumError("too many registers")
    row = list(letters[:k])
    col = list(letters[k:2 * k])
    for i in range(k):
        if i not in keep_idx:
            col[i] = row[i]
    out = "".join(row[i] for i in keep_idx) + "".join(col[i] for i in keep_idx)
    r = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d = math.prod(dims[i] for i in keep_idx)
    return r.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Marginal on the registers named in ``keep`` (kept in their original order)."""
    keep = set(keep)
    unknown = keep - set(rho.names)
    if unknown:
        raise QuantumError(f"unknown registers {sorted(unknown)}")
    idx = [i for i, n in enumerate(rho.names) if n in keep]
    return DensityMatrix(_ptrace_array(rho.data, rho.dims, idx), tuple(rho.registers[i] for i in idx))


def _arr(r) -> np.ndarray:
    return r.data if isinstance(r, DensityMatrix) else np.asarray(r, dtype=complex)


def trace_distance(rho, sigma) -> float:
    a, b = _arr(rho), _arr(sigma)
    if a.shape != b.shape:
        raise QuantumError(f"dimension mismatch {a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(_herm(a - b))
    return float(np.abs(w).sum() / 2)


def dmax(rho, sigma) -> float:
    """``log2`` of the largest eigenvalue of ``sigma^{-1/2} rho sigma^{-1/2}`` on ``supp(sigma)``."""
    a, b = _arr(rho), _arr(sigma)
    if a.shape != b.shape:
        raise QuantumError(f"dimension mismatch {a.shape} vs {b.shape}")
    proj = _support(b)
    outside = a - proj @ a @ proj
    if np.abs(outside).max(initial=0.0) > 1e-9:
        raise QuantumError("supp(rho) is not contained in supp(sigma)")
    s = _mpow(b, -0.5)
    lam = np.linalg.eigvalsh(_herm(s @ a @ s)).max()
    if lam <= 0:
        raise QuantumError("rho vanishes on supp(sigma)")
    return float(math.log2(lam))


def _split(rho: DensityMatrix, first: Sequence[str]):
    first = list(first)
    rest = [n for n in rho.names if n not in first]
    if not first or set(first) - set(rho.names):
        raise QuantumError(f"cannot split {rho.names} at {first}")
    order = [n for n in rho.names if n in first] + rest
    if order != list(rho.names):
        raise QuantumError("the first part must be a leading block of registers")
    da = math.prod(d for n, d in rho.registers if n in first)
    return da, rest


def hmin_mod(rho: DensityMatrix | CQState, x_regs: Sequence[str] = ("X",)) -> float:
    """``-D_max(rho_XE || 1_X x rho_E)``."""
    if isinstance(rho, CQState):
        return rho.hmin_mod()
    da, rest = _split(rho, x_regs)
    if rest:
        rho_e = partial_trace(rho, rest).data
    else:
        rho_e = np.ones((1, 1), dtype=complex)
    return -dmax(rho.data, np.kron(np.eye(da), rho_e))


def collision_gamma(rho: DensityMatrix, a_regs: Sequence[str] = None) -> float:
    """``|| (1 x rho_B^{-1/4}) rho_AB (1 x rho_B^{-1/4}) ||_2^2`` with A the leading registers."""
    a_regs = list(a_regs) if a_regs is not None else [rho.names[0]]
    da, rest = _split(rho, a_regs)
    rho_b = partial_trace(rho, rest).data if rest else np.ones((1, 1), dtype=complex)
    d = np.kron(np.eye(da), _mpow(rho_b, -0.25))
    s = d @ rho.data @ d
    return float(np.real(np.vdot(s, s)))


def renyi2_sandwiched(rho, sigma) -> float:
    """``log2 Tr[(sigma^{-1/4} rho sigma^{-1/4})^2]``."""
    a, b = _arr(rho), _arr(sigma)
    s = _mpow(b, -0.25)
    m = s @ a @ s
    return float(math.log2(np.real(np.trace(m @ m))))


@dataclass
class CQState:
    """``sum_x P(x) |x><x| x rho_E^x``."""

    weights: np.ndarray
    conditionals: list
    e_dim: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.min(initial=0.0) < 0 or abs(w.sum() - 1) > HERM_TOL:
            raise QuantumError("weights must be a probability vector")
        conds = [np.asarray(c, dtype=complex) for c in self.conditionals]
        if len(conds) != len(w):
            raise QuantumError("one conditional state per classical value")
        d = conds[0].shape[0]
        for c in conds:
            if c.shape != (d, d):
                raise QuantumError("conditional states differ in dimension")
            DensityMatrix(c)
        self.weights, self.conditionals, self.e_dim = w, conds, d

    @property
    def nx(self) -> int:
        return len(self.weights)

    def rho_e(self) -> np.ndarray:
        return sum(p * c for p, c in zip(self.weights, self.conditionals))

    def to_density(self) -> DensityMatrix:
        d = self.e_dim
        out = np.zeros((self.nx * d, self.nx * d), dtype=complex)
        for x, (p, c) in enumerate(zip(self.weights, self.conditionals)):
            out[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * c
        return DensityMatrix(out, (("X", self.nx), ("E", d)))

    def hmin_mod(self) -> float:
        """Block-diagonal evaluation of ``-D_max(rho_XE || 1 x rho_E)``."""
        s = _mpow(self.rho_e(), -0.5)
        lam = max(np.linalg.eigvalsh(_herm(s @ (p * c) @ s)).max() for p, c in zip(self.weights, self.conditionals))
        return float(-math.log2(lam))


def verify_renner_ip(cq: CQState, p: int, n: int) -> dict:
    """Check ``E_y Tr[((1 x rho_M^{-1/2})(rho^y_ZM - U_Z x rho_M))^2] <= 2^{-hmin_mod(X|M)}``.

    Z = <X, y> over F_p^n with y uniform.  Also returns the intermediate
    collision term ``Tr rho_XM (1 x rho_M^{-1/2}) rho_XM (1 x rho_M^{-1/2})``.
    """
    if cq.nx != p**n:
        raise QuantumError(f"X alphabet must be F_{p}^{n}")
    if cq.nx * cq.e_dim > 200:
        raise QuantumError("instance too large (total dimension above 200)")
    spec = TwoWiseSpec.ip(p, n)
    table = spec.full_table()
    rho_m = cq.rho_e()
    s = _mpow(rho_m, -0.5)
    blocks = [w * c for w, c in zip(cq.weights, cq.conditionals)]
    lhs = 0.0
    for y in range(spec.ny):
        for z in range(p):
            dz = sum((blocks[x] for x in range(cq.nx) if table[x, y] == z), np.zeros_like(rho_m)) - rho_m / p
            lhs += float(np.real(np.trace(s @ dz @ s @ dz)))
    lhs /= spec.ny
    mid = float(sum(np.real(np.trace(s @ b @ s @ b)) for b in blocks))
    rhs = 2.0 ** (-cq.hmin_mod())
    return {"lhs": lhs, "mid": mid, "rhs": rhs, "holds": lhs <= rhs + 1e-9}


@dataclass
class PostselectedMap:
    """Kraus operators ``K_j: in -> out x flag`` (flag is the last, two-level factor).

    ``select`` is the flag value kept by postselection.
    """

    kraus: list
    out_dim: int
    select: int = 1

    def __post_init__(self):
        ks = [np.asarray(k, dtype=complex) for k in self.kraus]
        din = ks[0].shape[1]
        for k in ks:
            if k.shape != (2 * self.out_dim, din):
                raise QuantumError(f"Kraus operator has shape {k.shape}, expected {(2 * self.out_dim, din)}")
        comp = sum(k.conj().T @ k for k in ks)
        if np.abs(comp - np.eye(din)).max() > 1e-10:
            raise QuantumError("Kraus operators are not complete")
        self.kraus = ks

    @property
    def in_dim(self) -> int:
        return self.kraus[0].shape[1]

    def selected(self) -> list:
        """``(1 x <select|) K_j`` for every Kraus operator."""
        return [k.reshape(self.out_dim, 2, self.in_dim)[:, self.select, :] for k in self.kraus]

    @classmethod
    def from_isometry(cls, v: np.ndarray, out_dim: int, select: int = 1) -> PostselectedMap:
        return cls([v], out_dim, select)

    def to_record(self) -> dict:
        return {"out_dim": self.out_dim, "select": self.select,
                "kraus": [_complex_rows(k) for k in self.kraus]}

    @classmethod
    def from_record(cls, rec: dict) -> PostselectedMap:
        return cls([_complex_from_rows(k) for k in rec["kraus"]], rec["out_dim"], rec["select"])


def _complex_rows(a: np.ndarray) -> list:
    return [[[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in row] for row in np.asarray(a)]


def _complex_from_rows(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def apply_channel(rho, kraus: Sequence[np.ndarray]) -> np.ndarray:
    a = _arr(rho)
    return sum(k @ a @ k.conj().T for k in kraus)


@dataclass
class Thm31Instance:
    """Inputs of the two-wise-extractor check.

    ``tau`` is a pure state on N x M.  ``map_a`` acts on X1 x N (X1 the copy
    of x held by Alice) with output ``X1' N'``; ``map_b`` acts on Y x M with
    output ``Y' M'``.  ``m_out`` is the dimension of the M' factor, which is
    the trailing factor of map_b's output and the only quantum register the
    extractor output is tested against.
    """

    f: TwoWiseSpec
    tau: np.ndarray
    n_dim: int
    m_dim: int
    map_a: PostselectedMap
    map_b: PostselectedMap
    m_out: int
    seed: int | None = None

    def __post_init__(self):
        if self.f.nx != self.f.ny:
            raise QuantumError("the check requires |X| = |Y|")
        tau = np.asarray(self.tau, dtype=complex).ravel()
        if tau.shape != (self.n_dim * self.m_dim,) or abs(np.linalg.norm(tau) - 1) > 1e-10:
            raise QuantumError("tau must be a unit vector on N x M")
        self.tau = tau
        if self.map_a.in_dim != self.f.nx * self.n_dim or self.map_b.in_dim != self.f.ny * self.m_dim:
            raise QuantumError("map input dimensions must be |X| |N| and |Y| |M|")
        if self.map_b.out_dim % self.m_out:
            raise QuantumError("M' must divide map_b's output dimension")

    def to_json(self) -> str:
        rec = {"f": json.loads(self.f.to_json()), "n_dim": self.n_dim, "m_dim": self.m_dim,
               "m_out": self.m_out, "seed": self.seed, "tau": _complex_rows(self.tau[None, :])[0],
               "map_a": self.map_a.to_record(), "map_b": self.map_b.to_record()}
        return json.dumps(rec)

    @classmethod
    def from_json(cls, text: str) -> Thm31Instance:
        rec = json.loads(text)
        return cls(TwoWiseSpec.from_json(json.dumps(rec["f"])), _complex_from_rows([rec["tau"]])[0],
                   rec["n_dim"], rec["m_dim"], PostselectedMap.from_record(rec["map_a"]),
                   PostselectedMap.from_record(rec["map_b"]), rec["m_out"], rec["seed"])


def _controlled(ops: list, value: int, size: int, inner: int) -> list:
    """Restrict operators on (value register x inner) to input ``|value>``."""
    return [k[:, value * inner:(value + 1) * inner] for k in ops]


def _summary(f, prab, eps, hm=None, prb=None) -> dict:
    nx, nz = f.nx, f.nz
    out = {"epsilon": eps, "pr_ab": prab, "skipped": False}
    if prab < 1e-12:
        out.update(skipped=True, lhs=None, rhs=None, holds=True, notice="postselection probability below 1e-12")
        return out
    lhs = math.log2(nx) - math.log2(nz) + math.log2(prab)
    rhs = 2 * math.log2(1 / eps) if eps > 0 else math.inf
    out.update(lhs=lhs, rhs=rhs, holds=bool(eps < 1e-8 or lhs <= rhs + 1e-6))
    if hm is not None:
        lhs1 = hm - math.log2(nz) + math.log2(prb)
        out.update(hmin_mod_rho=hm, pr_b=prb, lhs1=lhs1, holds1=bool(eps < 1e-8 or lhs1 <= rhs + 1e-6))
    return out


def verify_thm31(inst: Thm31Instance) -> dict:
    """Classical-quantum route: condition on (x, y), apply the selected Kraus parts.

    Returns epsilon = Delta(Phi_ZYM', U_Z x Phi_YM'), Pr(A=1, B=1), the
    inequality sides and verdict.  The first inequality is also checked with
    hmin_mod of Alice's postselected c-q state in place of H_min.
    """
    f = inst.f
    nx, ny, nz = f.nx, f.ny, f.nz
    table = f.full_table()
    tau = inst.tau.reshape(inst.n_dim, inst.m_dim)
    ka = inst.map_a.selected()
    kb = inst.map_b.selected()
    a_out, b_out, m_out = inst.map_a.out_dim, inst.map_b.out_dim, inst.m_out
    rest_b = b_out // m_out
    # Alice's branch for each x: operators N -> X1'N'
    alice = [_controlled(ka, x, nx, inst.n_dim) for x in range(nx)]
    bob = [_controlled(kb, y, ny, inst.m_dim) for y in range(ny)]
    prab = 0.0
    phi = np.zeros((nz, ny, m_out, m_out), dtype=complex)
    for x in range(nx):
        # unnormalised post-Alice state on (X1'N') x M, one term per Kraus operator
        alice_vecs = [ax @ tau for ax in alice[x]]
        for y in range(ny):
            z = table[x, y]
            for av in alice_vecs:
                for by in bob[y]:
                    v = av @ by.T  # (a_out, b_out)
                    v = v.reshape(a_out, rest_b, m_out)
                    rm = np.einsum("abi,abj->ij", v, v.conj())
                    phi[z, y] += rm / (nx * ny)
    prab = float(np.real(sum(np.trace(phi[z, y]) for z in range(nz) for y in range(ny))))
    if prab < 1e-12:
        return _summary(f, prab, float("nan"))
    phi /= prab
    eps = 0.0
    for y in range(ny):
        marg = phi[:, y].sum(axis=0) / nz
        for z in range(nz):
            eps += np.abs(np.linalg.eigvalsh(_herm(phi[z, y] - marg))).sum()
    eps /= 2
    # Alice's postselected c-q state rho_XM for the first inequality
    weights, conds = [], []
    for x in range(nx):
        rm = np.zeros((inst.m_dim, inst.m_dim), dtype=complex)
        for ax in alice[x]:
            v = ax @ tau
            rm += v.T @ v.conj()
        weights.append(np.real(np.trace(rm)) / nx)
        conds.append(rm)
    pra = float(sum(weights))
    hm, prb = None, None
    if pra > 1e-12:
        w = np.array(weights) / pra
        cs = [c / np.real(np.trace(c)) if np.real(np.trace(c)) > 1e-14 else np.eye(inst.m_dim) / inst.m_dim for c in conds]
        cq = CQState(w, cs)
        hm, prb = cq.hmin_mod(), prab / pra
    return _summary(f, prab, float(eps), hm, prb)


def thm31_statevector(inst: Thm31Instance) -> dict:
    """State-vector route over X x X1 x N x M x Y x Y1 with Stinespring dilations.

    Each Kraus family is dilated to an isometry with an environment register,
    the flags are projected, and the marginal on (X, Y1, M') is taken by a
    partial trace; X and Y1 are read in the computational basis.
    """
    f = inst.f
    nx, ny, nz = f.nx, f.ny, f.nz
    table = f.full_table()

    def stinespring(pmap: PostselectedMap) -> np.ndarray:
        # V = sum_j K_j x |j>_env ; output ordering (out, flag, env)
        r = len(pmap.kraus)
        v = np.zeros((2 * pmap.out_dim * r, pmap.in_dim), dtype=complex)
        for j, k in enumerate(pmap.kraus):
            v[j::r] = k
        return v, r

    va, ra = stinespring(inst.map_a)
    vb, rb = stinespring(inst.map_b)
    # |Psi> = sum_{x,y} |x>_X |x>_X1 |tau>_NM |y>_Y |y>_Y1 / sqrt(nx ny)
    psi = np.zeros((nx, nx, inst.n_dim, inst.m_dim, ny, ny), dtype=complex)
    tau = inst.tau.reshape(inst.n_dim, inst.m_dim)
    for x in range(nx):
        for y in range(ny):
            psi[x, x, :, :, y, y] = tau / math.sqrt(nx * ny)
    # Alice acts on (X1, N); Bob on (Y, M)
    psi = psi.transpose(0, 1, 2, 4, 3, 5)  # X, X1, N, Y, M, Y1
    psi = psi.reshape(nx, nx * inst.n_dim, ny * inst.m_dim, ny)
    a_out, b_out = inst.map_a.out_dim, inst.map_b.out_dim
    psi = np.einsum("oi,xijy->xojy", va, psi)
    psi = np.einsum("oj,xijy->xioy", vb, psi)
    psi = psi.reshape(nx, a_out, 2, ra, b_out, 2, rb, ny)
    sel = psi[:, :, inst.map_a.select, :, :, inst.map_b.select, :, :]  # X, a_out, ra, b_out, rb, Y1
    prab = float(np.real(np.vdot(sel, sel)))
    if prab < 1e-12:
        return _summary(f, prab, float("nan"))
    m_out = inst.m_out
    sel = sel.reshape(nx, a_out, ra, b_out // m_out, m_out, rb, ny) / math.sqrt(prab)
    # reduced state on X, M', Y1 (the first and last read as classical)
    red = np.einsum("xabcmdy,XabcMdY->xmyXMY", sel, sel.conj())
    dim = nx * m_out * ny
    rho = DensityMatrix(red.reshape(dim, dim), (("X", nx), ("Mp", m_out), ("Y", ny)))
    # dephase X and Y, build Phi_ZYM' and compare with U_Z x Phi_YM'
    r = rho.data.reshape(nx, m_out, ny, nx, m_out, ny)
    phi = np.zeros((nz, ny, m_out, m_out), dtype=complex)
    for x in range(nx):
        for y in range(ny):
            phi[table[x, y], y] += r[x, :, y, x, :, y]
    big = np.zeros((nz * ny * m_out,) * 2, dtype=complex)
    ref = np.zeros_like(big)
    for z in range(nz):
        for y in range(ny):
            i = (z * ny + y) * m_out
            big[i:i + m_out, i:i + m_out] = phi[z, y]
            ref[i:i + m_out, i:i + m_out] = phi[:, y].sum(axis=0) / nz
    eps = trace_distance(big, ref)
    return _summary(f, prab, eps)


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def haar_isometry(din: int, dout: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random isometry ``C^din -> C^dout`` (QR of a Gaussian, diagonal phases fixed)."""
    if dout < din:
        raise QuantumError("an isometry needs dout >= din")
    g = rng.normal(size=(dout, din)) + 1j * rng.normal(size=(dout, din))
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Partial trace of a Haar-random pure state on ``dim x rank``."""
    rank = rank or dim
    psi = haar_state(dim * rank, rng).reshape(dim, rank)
    return psi @ psi.conj().T


def random_channel(din: int, dout: int, nkraus: int, rng: np.random.Generator) -> list:
    v = haar_isometry(din, dout * nkraus, rng)
    return [v[j * dout:(j + 1) * dout] for j in range(nkraus)]


def random_cq_state(nx: int, e_dim: int, rng: np.random.Generator) -> CQState:
    w = rng.dirichlet(np.ones(nx))
    return CQState(w, [random_density(e_dim, rng) for _ in range(nx)])


def random_thm31_instance(rng: np.random.Generator, f: TwoWiseSpec | None = None, n_dim: int = 2,
                          m_dim: int = 2, out_dim: int = 2, seed: int | None = None) -> Thm31Instance:
    """Haar tau on N x M and Haar isometries ``X1 N -> X1' N' flag`` and ``Y M -> Y' M' flag``."""
    f = f or TwoWiseSpec.ip(3, 1)
    tau = haar_state(n_dim * m_dim, rng)
    a_out = f.nx * out_dim
    b_out = f.ny * out_dim
    va = haar_isometry(f.nx * n_dim, 2 * a_out, rng)
    vb = haar_isometry(f.ny * m_dim, 2 * b_out, rng)
    return Thm31Instance(f, tau, n_dim, m_dim, PostselectedMap.from_isometry(va, a_out),
                         PostselectedMap.from_isometry(vb, b_out), out_dim, seed)


def _flag_isometry(dim: int, flag_of) -> np.ndarray:
    v = np.zeros((2 * dim, dim), dtype=complex)
    for i in range(dim):
        v[2 * i + flag_of(i), i] = 1
    return v


def trivial_thm31_instance(f: TwoWiseSpec | None = None) -> Thm31Instance:
    """No entanglement and both flags always 1."""
    f = f or TwoWiseSpec.ip(3, 1)
    va = PostselectedMap.from_isometry(_flag_isometry(f.nx, lambda i: 1), f.nx)
    vb = PostselectedMap.from_isometry(_flag_isometry(f.ny, lambda i: 1), f.ny)
    return Thm31Instance(f, np.ones(1), 1, 1, va, vb, 1)


def y_zero_thm31_instance(f: TwoWiseSpec | None = None) -> Thm31Instance:
    """Bob measures Y and keeps only ``y = 0``."""
    f = f or TwoWiseSpec.ip(3, 1)
    va = PostselectedMap.from_isometry(_flag_isometry(f.nx, lambda i: 1), f.nx)
    vb = PostselectedMap.from_isometry(_flag_isometry(f.ny, lambda i: int(i == 0)), f.ny)
    return Thm31Instance(f, np.ones(1), 1, 1, va, vb, 1)
