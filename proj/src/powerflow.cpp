#include "lsebu/powerflow.hpp"

#include <cmath>

#include "lsebu/linalg.hpp"

namespace lsebu {

namespace {
constexpr double kPi = 3.14159265358979323846;
double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

AdmittanceModel build_admittance(const NetworkCase& net) {
    AdmittanceModel m;
    m.n_bus = net.buses.size();
    m.y.assign(m.n_bus * m.n_bus, Complex(0.0, 0.0));
    m.bus_shunt.resize(m.n_bus);

    for (std::size_t i = 0; i < m.n_bus; ++i) {
        const Bus& b = net.buses[i];
        m.bus_shunt[i] = Complex(b.g_shunt, b.b_shunt) / net.base_mva;
        m.at(i, i) += m.bus_shunt[i];
    }

    for (std::size_t bi = 0; bi < net.branches.size(); ++bi) {
        const Branch& br = net.branches[bi];
        if (br.status != BranchStatus::InService) continue;
        if (br.r * br.r + br.x * br.x == 0.0)
            throw ValidationError("branch " + std::to_string(br.from_bus) + "-" +
                                  std::to_string(br.to_bus) + " has zero series impedance");

        const Complex ys = 1.0 / Complex(br.r, br.x);
        const Complex ysh(0.0, br.b_total / 2.0);
        const double tau = br.tap == 0.0 ? 1.0 : br.tap;
        const Complex shift = std::polar(1.0, deg2rad(br.shift));

        BranchAdmittance ba;
        ba.branch_index = bi;
        ba.from = net.index_of(br.from_bus);
        ba.to = net.index_of(br.to_bus);
        ba.y_ff = (ys + ysh) / (tau * tau);
        ba.y_ft = -ys / (tau * std::conj(shift));
        ba.y_tf = -ys / (tau * shift);
        ba.y_tt = ys + ysh;

        m.at(ba.from, ba.from) += ba.y_ff;
        m.at(ba.from, ba.to) += ba.y_ft;
        m.at(ba.to, ba.from) += ba.y_tf;
        m.at(ba.to, ba.to) += ba.y_tt;
        m.branches.push_back(ba);
    }
    return m;
}

PowerFlowSolution solve_power_flow(const NetworkCase& net, const PowerFlowOptions& opt) {
    if (!is_connected(net)) throw ValidationError("network is not connected");
    const std::size_t nb = net.buses.size();
    const AdmittanceModel model = build_admittance(net);

    // Net scheduled injection per bus, p.u.
    Vector p_sched(nb, 0.0), q_sched(nb, 0.0);
    std::vector<double> setpoint(nb, 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
        p_sched[i] = -net.buses[i].p_demand / net.base_mva;
        q_sched[i] = -net.buses[i].q_demand / net.base_mva;
    }
    for (const Generator& g : net.generators) {
        if (g.status != GenStatus::On) continue;
        const std::size_t i = net.index_of(g.bus);
        p_sched[i] += g.p_gen / net.base_mva;
        q_sched[i] += g.q_gen / net.base_mva;
        if (setpoint[i] == 0.0) setpoint[i] = g.v_setpoint;
    }

    std::vector<double> vm(nb), va(nb);
    for (std::size_t i = 0; i < nb; ++i) {
        const Bus& b = net.buses[i];
        vm[i] = b.v_mag_init;
        va[i] = deg2rad(b.v_ang_init);
        if ((b.kind == BusKind::PV || b.kind == BusKind::Slack) && setpoint[i] > 0.0)
            vm[i] = setpoint[i];
    }

    // Unknown ordering: angles at all non-slack buses, then magnitudes at PQ buses.
    std::vector<std::size_t> ang_idx, mag_idx;
    for (std::size_t i = 0; i < nb; ++i) {
        if (net.buses[i].kind != BusKind::Slack) ang_idx.push_back(i);
        if (net.buses[i].kind == BusKind::PQ) mag_idx.push_back(i);
    }
    const std::size_t na = ang_idx.size(), nm = mag_idx.size(), nu = na + nm;

    Vector p_calc(nb), q_calc(nb);
    auto compute_injections = [&] {
        for (std::size_t i = 0; i < nb; ++i) {
            double p = 0.0, q = 0.0;
            for (std::size_t j = 0; j < nb; ++j) {
                const Complex yij = model.at(i, j);
                if (yij == Complex(0.0, 0.0)) continue;
                const double g = yij.real(), b = yij.imag();
                const double th = va[i] - va[j];
                const double c = std::cos(th), s = std::sin(th);
                p += vm[i] * vm[j] * (g * c + b * s);
                q += vm[i] * vm[j] * (g * s - b * c);
            }
            p_calc[i] = p;
            q_calc[i] = q;
        }
    };

    auto max_mismatch = [&] {
        double m = 0.0;
        for (std::size_t i : ang_idx) m = std::max(m, std::abs(p_calc[i] - p_sched[i]));
        for (std::size_t i : mag_idx) m = std::max(m, std::abs(q_calc[i] - q_sched[i]));
        return m;
    };

    PowerFlowSolution sol;
    compute_injections();
    double mis = max_mismatch();

    while (mis > opt.tol) {
        if (sol.iterations >= opt.max_iter)
            throw NumericError("power flow did not converge in " + std::to_string(opt.max_iter) +
                               " iterations (mismatch " + std::to_string(mis) + ")");

        Matrix jac(nu, nu);
        for (std::size_t r = 0; r < na; ++r) {
            const std::size_t i = ang_idx[r];
            for (std::size_t c = 0; c < na; ++c) {
                const std::size_t j = ang_idx[c];
                const Complex yij = model.at(i, j);
                const double g = yij.real(), b = yij.imag();
                if (i == j) {
                    jac(r, c) = -q_calc[i] - b * vm[i] * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(r, c) = vm[i] * vm[j] * (g * std::sin(th) - b * std::cos(th));
                }
            }
            for (std::size_t c = 0; c < nm; ++c) {
                const std::size_t j = mag_idx[c];
                const Complex yij = model.at(i, j);
                const double g = yij.real(), b = yij.imag();
                if (i == j) {
                    jac(r, na + c) = p_calc[i] / vm[i] + g * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(r, na + c) = vm[i] * (g * std::cos(th) + b * std::sin(th));
                }
            }
        }
        for (std::size_t r = 0; r < nm; ++r) {
            const std::size_t i = mag_idx[r];
            for (std::size_t c = 0; c < na; ++c) {
                const std::size_t j = ang_idx[c];
                const Complex yij = model.at(i, j);
                const double g = yij.real(), b = yij.imag();
                if (i == j) {
                    jac(na + r, c) = p_calc[i] - g * vm[i] * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(na + r, c) = -vm[i] * vm[j] * (g * std::cos(th) + b * std::sin(th));
                }
            }
            for (std::size_t c = 0; c < nm; ++c) {
                const std::size_t j = mag_idx[c];
                const Complex yij = model.at(i, j);
                const double g = yij.real(), b = yij.imag();
                if (i == j) {
                    jac(na + r, na + c) = q_calc[i] / vm[i] - b * vm[i];
                } else {
                    const double th = va[i] - va[j];
                    jac(na + r, na + c) = vm[i] * (g * std::sin(th) - b * std::cos(th));
                }
            }
        }

        Vector f(nu);
        for (std::size_t r = 0; r < na; ++r) f[r] = p_calc[ang_idx[r]] - p_sched[ang_idx[r]];
        for (std::size_t r = 0; r < nm; ++r) f[na + r] = q_calc[mag_idx[r]] - q_sched[mag_idx[r]];

        Vector dx;
        try {
            dx = lu_solve(jac, f);
        } catch (const NumericError&) {
            throw NumericError("power flow Jacobian is singular");
        }

        for (std::size_t r = 0; r < na; ++r) va[ang_idx[r]] -= dx[r];
        for (std::size_t r = 0; r < nm; ++r) vm[mag_idx[r]] -= dx[na + r];

        ++sol.iterations;
        compute_injections();
        mis = max_mismatch();
    }

    sol.max_mismatch = mis;
    sol.v.resize(nb);
    for (std::size_t i = 0; i < nb; ++i) sol.v[i] = std::polar(vm[i], va[i]);
    return sol;
}

BranchCurrents branch_currents(const AdmittanceModel& model, const ComplexVoltageProfile& v) {
    BranchCurrents out;
    out.from.reserve(model.branches.size());
    out.to.reserve(model.branches.size());
    for (const BranchAdmittance& ba : model.branches) {
        out.from.push_back(ba.y_ff * v[ba.from] + ba.y_ft * v[ba.to]);
        out.to.push_back(ba.y_tf * v[ba.from] + ba.y_tt * v[ba.to]);
    }
    return out;
}

std::vector<Complex> bus_injections(const AdmittanceModel& model, const ComplexVoltageProfile& v) {
    std::vector<Complex> s(model.n_bus);
    for (std::size_t i = 0; i < model.n_bus; ++i) {
        Complex acc(0.0, 0.0);
        for (std::size_t j = 0; j < model.n_bus; ++j) acc += model.at(i, j) * v[j];
        s[i] = v[i] * std::conj(acc);
    }
    return s;
}

}  // namespace lsebu
