"""Verification suites run by the command line driver."""

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .correlations import (amplification_correction, commutator_integral,
                           ee_spectral_density, integrated_correlations,
                           lattice_cosine_identity, naive_fdt_density, sample,
                           spectral_densities)
from .errors import AmpQEDError, AnalyticityViolation, NonPositiveSpectrum
from .green import (assemble_operator, lattice_vacuum_green, pole_scan, solve_green,
                    verify_integral_relation)
from .grids import FrequencyGrid
from .media import build_kernel, check_kramers_kronig, check_schwarz, layer_profiles
from .operator_core import (Kernel, factor_K, hermitian_split, inverse_kernel,
                            is_dissipative, rel_diff, sigma_av, spectral_decompose)
from .quantization import noise_covariances, partition_channels
from .transfer import lasing_threshold

ANALYTIC_SUITES = ("commutator", "correlations", "compare-naive")


@dataclass
class SuiteResult:
    """Outcome of one suite: status, residual rows and flagged items."""

    name: str
    status: str = "pass"
    reason: str = None
    residuals: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def row(self, quantity, value, omega=None):
        self.residuals.append({"omega": None if omega is None else float(omega),
                               "quantity": quantity, "value": float(value)})

    def check(self, ok, reason):
        if not ok and self.status == "pass":
            self.status = "fail"
            self.reason = reason

    def to_dict(self):
        return {"name": self.name, "status": self.status, "reason": self.reason,
                "residuals": self.residuals, "flagged": self.flagged, "details": self.details}


@dataclass
class Report:
    """Ordered suite results plus provenance of the scenario."""

    scenario: str
    config_hash: str
    config: dict
    analyses: list
    densities: dict = None
    version: str = __version__

    @property
    def passed(self):
        return all(a["status"] == "pass" for a in self.analyses)

    def to_dict(self):
        return {"format": "ampqed-report/1", "scenario": self.scenario,
                "version": self.version, "config_hash": self.config_hash,
                "config": self.config, "analyses": self.analyses,
                "densities": self.densities}

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "ampqed-report/1":
            raise ValueError("not an ampqed report")
        return cls(d["scenario"], d["config_hash"], d["config"], d["analyses"],
                   d.get("densities"), d["version"])


def _complex_array(a):
    a = np.asarray(a)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


class _Context:
    def __init__(self, cfg):
        self.cfg = cfg
        self.profiles = layer_profiles(cfg.model, cfg.grid)
        self.scan = None
        self.scan_failed = False

    def sample(self, omega, eps_reg=None):
        return sample(self.cfg.model, self.cfg.grid, omega, self.cfg.constants,
                      self.cfg.tolerances["eps_reg"] if eps_reg is None else eps_reg,
                      self.profiles)

    def kernel(self, omega):
        return build_kernel(self.cfg.model, self.cfg.grid, omega, self.cfg.constants,
                            self.profiles)

    def lattice_grid(self):
        cfg = self.cfg
        return FrequencyGrid.lattice(cfg.grid, cfg.omega_max, cfg.n_quad,
                                     resonances=cfg.model.resonances(), constants=cfg.constants)

    def require_analyticity(self):
        if self.scan is None and self.cfg.model.has_gain:
            r0, r1, i0, i1 = self.cfg.default_scan_region()
            self.scan = pole_scan(self.cfg.model, self.cfg.grid, (r0, r1, i0, i1),
                                  self.cfg.scan_resolution, self.cfg.constants,
                                  self.cfg.tolerances["pole_threshold"])
        if self.scan is not None and self.scan.poles:
            raise AnalyticityViolation("Green function has upper-half-plane poles",
                                       self.scan.poles)


def suite_validate_kernel(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    for om in cfg.omegas:
        Q = ctx.kernel(om)
        scale = Q.norm()
        recip = (Q - Q.T).norm() / scale if scale > 0 else 0.0
        hermitian_split(Q)
        Qm = ctx.kernel(-om)
        ksch = (Qm - Kernel(Q.values.conj(), Q.grid)).norm() / scale if scale > 0 else 0.0
        sch = check_schwarz(cfg.model, om)
        res.row("reciprocity", recip, om)
        res.row("schwarz-permittivity", sch, om)
        res.row("schwarz-kernel", ksch, om)
        res.check(recip <= tol["spectral"], "not-reciprocal")
        res.check(sch <= tol["schwarz"] and ksch <= tol["schwarz"], "schwarz-violation")
    kk = check_kramers_kronig(cfg.model, tol=tol["kk"])
    res.row("kramers-kronig", kk)
    res.check(kk <= tol["kk"], "kramers-kronig-violation")


def _spectral_checks(spec, sigma, omega, eps_reg, constants):
    """Residuals of the spectral identities on the retained channel space."""
    grid = sigma.grid
    ident = Kernel.identity(grid)
    lam = spec.eigenvalues
    keep = np.abs(lam) > eps_reg
    proj = spec.function(keep.astype(float))
    F = spec.vectors
    gram = F.conj().T @ (F * grid.weights[:, None])
    out = {
        "reconstruction": rel_diff(spec.reconstruct(), sigma) if sigma.norm() > 0 else 0.0,
        "orthonormality": float(np.linalg.norm(gram - np.eye(len(lam))) / np.sqrt(len(lam))),
        "completeness": rel_diff(spec.function(np.ones(len(lam))), ident),
    }
    rho = inverse_kernel(spec, eps_reg)
    pn = max(proj.norm(), 1.0)
    out["rho-sigma"] = (rho @ sigma - proj).norm() / pn
    out["sigma-rho"] = (sigma @ rho - proj).norm() / pn
    P = spec.function(np.where(keep, np.sign(lam), 0.0))
    out["parity-square"] = (P @ P - proj).norm() / pn
    sav = sigma_av(spec)
    out["sigma-av"] = (sav - P @ sigma).norm() / max(sav.norm(), 1e-300) if sav.norm() > 0 else 0.0
    part = partition_channels(spec, eps_reg)
    c_anti, c_norm = noise_covariances(part, constants, omega)
    pref = constants.hbar * omega / np.pi
    ref_sum, ref_diff = pref * sav, pref * sigma
    out["covariance-sum"] = rel_diff(c_anti + c_norm, ref_sum) if ref_sum.norm() > 0 else 0.0
    out["covariance-difference"] = rel_diff(c_anti - c_norm, ref_diff) if ref_diff.norm() > 0 else 0.0
    return out, part


def suite_spectrum(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    for om in cfg.omegas:
        sigma, _ = hermitian_split(ctx.kernel(om))
        spec = spectral_decompose(sigma)
        reg = tol["eps_reg"] * spec.scale if spec.scale > 0 else tol["eps_reg"]
        checks, part = _spectral_checks(spec, sigma, float(om), reg, cfg.constants)
        dissipative = is_dissipative(spec, reg)
        try:
            K = factor_K(spec, reg)
            checks["K-factor"] = rel_diff(K @ K.H, sigma) if sigma.norm() > 0 else 0.0
            consistent = dissipative
        except NonPositiveSpectrum:
            consistent = not dissipative
        if dissipative:
            c_norm = noise_covariances(part, cfg.constants, float(om))[1]
            checks["covariance-norm-absorbing"] = c_norm.max_abs()
        for k, v in checks.items():
            res.row(k, v, om)
            res.check(v <= tol["spectral"], f"{k}-identity")
        res.check(consistent, "factor-K-inconsistent")
        res.row("plus-channels", len(part.plus), om)
        res.row("minus-channels", len(part.minus), om)
        res.row("dropped-channels", len(part.dropped), om)
        if part.minus:
            res.flagged.append({"omega": float(om), "minus_channels": len(part.minus),
                                "nodes": [float(cfg.grid.nodes[int(np.argmax(np.abs(c.vector)))])
                                          for c in part.minus[:8]]})


def suite_pole_scan(ctx, res):
    cfg = ctx.cfg
    region = cfg.default_scan_region()
    scan = pole_scan(cfg.model, cfg.grid, region, cfg.scan_resolution, cfg.constants,
                     cfg.tolerances["pole_threshold"])
    ctx.scan = scan
    res.details["region"] = list(region)
    res.details["median_smin"] = scan.median
    res.details["round_trip"] = scan.round_trip
    res.flagged.extend([[p.real, p.imag] for p in scan.poles])
    res.row("poles", len(scan.poles))
    if scan.round_trip is not None:
        try:
            th = lasing_threshold(cfg.model)
            res.details["threshold_scale"] = th.scale
            res.details["lasing_omega"] = th.omega
        except ValueError:
            pass
    if scan.poles:
        ctx.scan_failed = True
        res.check(False, AnalyticityViolation.code)


def suite_green_identities(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    for om in cfg.omegas:
        Q = ctx.kernel(om)
        sigma, _ = hermitian_split(Q)
        G = solve_green(assemble_operator(Q, om, cfg.constants))
        r = verify_integral_relation(G, sigma, om, cfg.constants)
        recip = rel_diff(G.T, G)
        Gm = solve_green(assemble_operator(ctx.kernel(-om), -om, cfg.constants))
        sch = rel_diff(Kernel(Gm.values.conj(), G.grid), G)
        res.row("integral-relation", r, om)
        res.row("green-reciprocity", recip, om)
        res.row("green-schwarz", sch, om)
        res.row("condition", G.condition, om)
        res.check(r <= tol["solver"], "integral-relation")
        res.check(recip <= tol["spectral"] and sch <= tol["spectral"], "green-symmetry")
        if not cfg.model.layers:
            ref = Kernel(lattice_vacuum_green(cfg.grid, om, cfg.constants), cfg.grid)
            v = rel_diff(G, ref)
            res.row("vacuum-closed-form", v, om)
            res.check(v <= tol["solver"], "vacuum-closed-form")


def suite_commutator(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    fgrid = ctx.lattice_grid()
    result = commutator_integral(cfg.model, cfg.grid, fgrid, cfg.constants)
    res.row("commutator-residual", result.residual)
    res.row("quadrature-error", result.error)
    res.details["omega_max"] = cfg.omega_max
    res.details["band_split"] = fgrid.band_split
    res.check(result.residual <= tol["commutator"], "commutator-residual")
    if not cfg.model.layers:
        ref = lattice_cosine_identity(cfg.grid, fgrid.band_split, cfg.constants)
        v = rel_diff(result.real_part, ref)
        res.row("cosine-identity", v)
        res.check(v <= tol["commutator"], "cosine-identity")


def suite_correlations(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    ctx.require_analyticity()
    eps = tol["eps_reg"]
    sweep = [spectral_densities(cfg.model, cfg.grid, cfg.omegas, cfg.constants, e)
             for e in (eps, 1e-2 * eps, 1e2 * eps)]
    for k, om in enumerate(cfg.omegas):
        base = sweep[0][k]
        for kind in ("EE", "BB"):
            t = base[kind]
            res.row(f"{kind}-hermiticity", t.hermiticity_error(), om)
            res.row(f"{kind}-min-eigenvalue", t.min_eigenvalue(), om)
            res.check(t.hermiticity_error() <= tol["spectral"], f"{kind}-not-hermitian")
            res.check(t.min_eigenvalue() >= -tol["spectral"], f"{kind}-not-psd")
        change = 0.0
        for other in sweep[1:]:
            for kind in ("EE", "BB", "EE-naive", "EE-correction"):
                a, b = other[k][kind].values, base[kind].values
                change = max(change, float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)))
        res.row("regularizer-sensitivity", change, om)
        res.check(change < tol["regularizer"], "regularizer-sensitivity")
    integ = integrated_correlations(cfg.model, cfg.grid, ctx.lattice_grid(), cfg.constants, eps)
    for kind, t in integ.items():
        res.row(f"integrated-{kind}-norm", np.linalg.norm(t.values))
        res.row(f"integrated-{kind}-error", t.error)
    res.details["band_limit"] = ctx.lattice_grid().band_split
    if cfg.densities:
        ctx.densities = {
            "omegas": [float(w) for w in cfg.omegas],
            "nodes": cfg.grid.nodes.tolist(),
            "spectral": {kind: [_complex_array(row[kind].values) for row in sweep[0]]
                         for kind in ("EE", "BB", "EE-naive", "EE-correction")},
            "integrated": {kind: _complex_array(t.values) for kind, t in integ.items()},
        }


def suite_compare_naive(ctx, res):
    cfg, tol = ctx.cfg, ctx.cfg.tolerances
    ctx.require_analyticity()
    biggest = 0.0
    for om in cfg.omegas:
        s = ctx.sample(om)
        ee = ee_spectral_density(s.G, s.sav, om, cfg.constants)
        naive = naive_fdt_density(s.G, om, cfg.constants)
        corr = amplification_correction(s.G, s.sigma, s.sav, om, cfg.constants)
        nrm = np.linalg.norm(ee.values)
        split = np.linalg.norm(ee.values - naive.values - corr.values) / nrm
        rel_corr = np.linalg.norm(corr.values) / nrm
        biggest = max(biggest, rel_corr)
        res.row("decomposition", split, om)
        res.row("correction-relative", rel_corr, om)
        scale = ee.spectral_scale()
        low = corr.min_eigenvalue(scale)
        res.row("correction-min-eigenvalue", low, om)
        res.check(split <= tol["solver"], "decomposition")
        res.check(low >= -tol["spectral"], "correction-not-psd")
        nminus = len(s.partition.minus)
        rank = corr.rank(scale)
        res.row("correction-rank", rank, om)
        res.row("minus-channels", nminus, om)
        res.check(rank == nminus, "correction-rank")
        if not nminus:
            res.check(rel_corr <= tol["solver"], "fdt-reduction")
    res.details["max_correction_relative"] = biggest
    res.details["naive_label"] = "naive form is non-physical for amplifying media"


SUITE_FUNCTIONS = {
    "validate-kernel": suite_validate_kernel,
    "spectrum": suite_spectrum,
    "pole-scan": suite_pole_scan,
    "green-identities": suite_green_identities,
    "commutator": suite_commutator,
    "correlations": suite_correlations,
    "compare-naive": suite_compare_naive,
}


def run(cfg):
    """Run the requested suites in dependency order and return a :class:`Report`.

    Suites needing analyticity are skipped once the pole scan has failed.
    """
    ctx = _Context(cfg)
    ctx.densities = None
    results = []
    for name in cfg.analyses:
        res = SuiteResult(name)
        if name in ANALYTIC_SUITES and ctx.scan_failed:
            res.status, res.reason = "skipped", AnalyticityViolation.code
        else:
            try:
                SUITE_FUNCTIONS[name](ctx, res)
            except AmpQEDError as exc:
                res.status, res.reason = "fail", exc.code
                res.details["error"] = str(exc)
                if isinstance(exc, AnalyticityViolation):
                    ctx.scan_failed = True
                    res.flagged.extend([[complex(p).real, complex(p).imag] for p in exc.poles])
        results.append(res.to_dict())
    return Report(cfg.name, cfg.config_hash, cfg.raw, results, ctx.densities)
