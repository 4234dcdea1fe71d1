#ifndef LSEBU_POWERFLOW_HPP
#define LSEBU_POWERFLOW_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "lsebu/caseio.hpp"

namespace lsebu {

using Complex = std::complex<double>;

// Per-bus complex voltages, p.u., indexed like NetworkCase::buses.
using ComplexVoltageProfile = std::vector<Complex>;

// Pi-model coefficients of one in-service branch:
//   I_from = y_ff * V_f + y_ft * V_t
//   I_to   = y_tf * V_f + y_tt * V_t
struct BranchAdmittance {
    std::size_t branch_index = 0;  // position in NetworkCase::branches
    std::size_t from = 0;          // dense bus indices
    std::size_t to = 0;
    Complex y_ff, y_ft, y_tf, y_tt;
};

struct AdmittanceModel {
    std::size_t n_bus = 0;
    std::vector<Complex> y;  // dense bus admittance matrix, row-major
    std::vector<BranchAdmittance> branches;
    std::vector<Complex> bus_shunt;  // p.u. shunt admittance per bus

    Complex& at(std::size_t i, std::size_t j) { return y[i * n_bus + j]; }
    Complex at(std::size_t i, std::size_t j) const { return y[i * n_bus + j]; }
};

// Standard pi-model with off-nominal taps; tap 0 in the data means 1.0.
AdmittanceModel build_admittance(const NetworkCase& net);

struct PowerFlowOptions {
    double tol = 1e-8;   // max power mismatch, p.u.
    int max_iter = 30;
};

struct PowerFlowSolution {
    ComplexVoltageProfile v;
    int iterations = 0;
    double max_mismatch = 0.0;
};

// Full-Jacobian Newton-Raphson in polar coordinates, started from the case
// voltages. PV magnitudes are held at the generator setpoints; reactive
// limits are not enforced.
PowerFlowSolution solve_power_flow(const NetworkCase& net, const PowerFlowOptions& opt = {});

struct BranchCurrents {
    std::vector<Complex> from;  // per in-service branch, p.u.
    std::vector<Complex> to;
};

BranchCurrents branch_currents(const AdmittanceModel& model, const ComplexVoltageProfile& v);

// Complex power injected at each bus, S = V .* conj(Y V).
std::vector<Complex> bus_injections(const AdmittanceModel& model, const ComplexVoltageProfile& v);

}  // namespace lsebu

#endif
