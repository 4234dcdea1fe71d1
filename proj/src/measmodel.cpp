#include "lsebu/measmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsebu/rng.hpp"

namespace lsebu {

namespace {

constexpr double kSigmaFloorVariance = 1e-8;

// Affine map from a branch's admittance parameter q = y_s + j*b/2 to the
// channel coefficient pair (on V_f, on V_t):
//   coeff = alpha * q + offset
struct CoeffExpansion {
    Complex alpha_f, offset_f;
    Complex alpha_t, offset_t;
};

CoeffExpansion coeff_expansion(const Branch& br, bool at_from_end) {
    const double tau = br.tap == 0.0 ? 1.0 : br.tap;
    const Complex shift = std::polar(1.0, br.shift * 3.14159265358979323846 / 180.0);
    const Complex jb2(0.0, br.b_total / 2.0);
    CoeffExpansion e;
    if (at_from_end) {
        // I_from = (q / tau^2) V_f - ((q - j b/2) / (tau conj(shift))) V_t
        e.alpha_f = 1.0 / (tau * tau);
        e.offset_f = 0.0;
        e.alpha_t = -1.0 / (tau * std::conj(shift));
        e.offset_t = jb2 / (tau * std::conj(shift));
    } else {
        // I_to = -((q - j b/2) / (tau shift)) V_f + q V_t
        e.alpha_f = -1.0 / (tau * shift);
        e.offset_f = jb2 / (tau * shift);
        e.alpha_t = 1.0;
        e.offset_t = 0.0;
    }
    return e;
}

Complex nominal_q(const Branch& br) {
    return 1.0 / Complex(br.r, br.x) + Complex(0.0, br.b_total / 2.0);
}

// Writes the 2x4 real expansion of a complex coefficient pair into the two
// rows of a current channel.
void place_complex_pair(Matrix& p, std::size_t row_re, std::size_t n_bus, std::size_t f_idx,
                        std::size_t t_idx, Complex on_f, Complex on_t) {
    const std::size_t row_im = row_re + 1;
    p(row_re, f_idx) += on_f.real();
    p(row_re, n_bus + f_idx) += -on_f.imag();
    p(row_re, t_idx) += on_t.real();
    p(row_re, n_bus + t_idx) += -on_t.imag();
    p(row_im, f_idx) += on_f.imag();
    p(row_im, n_bus + f_idx) += on_f.real();
    p(row_im, t_idx) += on_t.imag();
    p(row_im, n_bus + t_idx) += on_t.real();
}

void place_complex_pair(SparseTriplets& p, std::size_t row_re, std::size_t n_bus, std::size_t f_idx,
                        std::size_t t_idx, Complex on_f, Complex on_t) {
    const std::size_t row_im = row_re + 1;
    auto put = [&](std::size_t i, std::size_t j, double v) {
        if (v != 0.0) p.entries.push_back({i, j, v});
    };
    put(row_re, f_idx, on_f.real());
    put(row_re, n_bus + f_idx, -on_f.imag());
    put(row_re, t_idx, on_t.real());
    put(row_re, n_bus + t_idx, -on_t.imag());
    put(row_im, f_idx, on_f.imag());
    put(row_im, n_bus + f_idx, on_f.real());
    put(row_im, t_idx, on_t.imag());
    put(row_im, n_bus + t_idx, on_t.real());
}

std::vector<Channel> enumerate_channels(const NetworkCase& net, const PmuPlacement& placement) {
    std::vector<Channel> channels;
    for (int pmu_bus : placement.buses) {
        const std::size_t bi = net.index_of(pmu_bus);
        Channel vc;
        vc.kind = Channel::Kind::Voltage;
        vc.bus = pmu_bus;
        vc.bus_idx = bi;
        channels.push_back(vc);

        for (std::size_t k = 0; k < net.branches.size(); ++k) {
            const Branch& br = net.branches[k];
            if (br.status != BranchStatus::InService) continue;
            if (br.from_bus != pmu_bus && br.to_bus != pmu_bus) continue;
            Channel cc;
            cc.kind = Channel::Kind::Current;
            cc.bus = pmu_bus;
            cc.bus_idx = bi;
            cc.branch_from = br.from_bus;
            cc.branch_to = br.to_bus;
            cc.branch_index = k;
            cc.at_from_end = br.from_bus == pmu_bus;
            channels.push_back(cc);
        }
    }
    return channels;
}

Matrix assemble_matrix(const NetworkCase& net, const std::vector<Channel>& channels,
                       const std::vector<Complex>& q_by_branch) {
    const std::size_t nb = net.buses.size();
    Matrix p(2 * channels.size(), 2 * nb);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const Channel& ch = channels[c];
        const std::size_t row_re = 2 * c;
        if (ch.kind == Channel::Kind::Voltage) {
            p(row_re, ch.bus_idx) = 1.0;
            p(row_re + 1, nb + ch.bus_idx) = 1.0;
            continue;
        }
        const Branch& br = net.branches[ch.branch_index];
        const CoeffExpansion e = coeff_expansion(br, ch.at_from_end);
        const Complex q = q_by_branch[ch.branch_index];
        const Complex on_f = e.alpha_f * q + e.offset_f;
        const Complex on_t = e.alpha_t * q + e.offset_t;
        place_complex_pair(p, row_re, nb, net.index_of(br.from_bus), net.index_of(br.to_bus),
                           on_f, on_t);
    }
    return p;
}

std::vector<Complex> nominal_q_table(const NetworkCase& net) {
    std::vector<Complex> q(net.branches.size());
    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const Branch& br = net.branches[k];
        if (br.status == BranchStatus::InService) q[k] = nominal_q(br);
    }
    return q;
}

}  // namespace

Matrix SparseTriplets::to_dense() const {
    Matrix m(rows, cols);
    for (const Entry& e : entries) m(e.i, e.j) += e.v;
    return m;
}

PmuPlacement parse_placement(std::string_view text) {
    PmuPlacement p;
    std::size_t line_no = 1;
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long v = 0;
        if (ls >> v) {
            std::string rest;
            if (ls >> rest) throw ParseError("unexpected token '" + rest + "'", line_no, 1);
            p.buses.push_back(static_cast<int>(v));
        } else {
            ls.clear();
            std::string junk;
            if (ls >> junk) throw ParseError("expected a bus id, got '" + junk + "'", line_no, 1);
        }
        ++line_no;
    }
    if (p.buses.empty()) throw ValidationError("placement lists no PMU buses");
    return p;
}

PmuPlacement load_placement_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open placement file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_placement(buf.str());
}

PmuPlacement all_bus_placement(const NetworkCase& net) {
    PmuPlacement p;
    p.buses.reserve(net.buses.size());
    for (const Bus& b : net.buses) p.buses.push_back(b.id);
    return p;
}

MeasurementModel build_measurement_matrix(const NetworkCase& net, const PmuPlacement& placement) {
    MeasurementModel model;
    model.n_bus = net.buses.size();
    model.channels = enumerate_channels(net, placement);
    model.p0m = assemble_matrix(net, model.channels, nominal_q_table(net));
    model.n_meas = model.p0m.rows();

    const std::size_t rank = qr_rank(model.p0m);
    if (rank < 2 * model.n_bus)
        throw ValidationError("placement leaves the system unobservable: rank " +
                              std::to_string(rank) + " < " + std::to_string(2 * model.n_bus));
    return model;
}

std::size_t measurement_rank(const NetworkCase& net, const PmuPlacement& placement) {
    const auto channels = enumerate_channels(net, placement);
    return qr_rank(assemble_matrix(net, channels, nominal_q_table(net)));
}

NetworkCase perturb_parameters(const NetworkCase& net, double max_rel_dev, std::uint64_t seed) {
    if (max_rel_dev < 0.0 || max_rel_dev >= 1.0)
        throw UsageError("max_rel_dev must lie in [0, 1)");
    NetworkCase out = net;
    if (max_rel_dev == 0.0) return out;
    Rng rng(seed);
    // Deviations are clamped at max_rel_dev; the spread keeps typical draws
    // well inside the cap, where the interval enclosure stays contractive on
    // meshed systems.
    auto bounded = [&] {
        double d;
        do {
            d = rng.normal() * (max_rel_dev / 8.0);
        } while (std::abs(d) > max_rel_dev);
        return d;
    };
    for (Branch& br : out.branches) {
        br.r *= 1.0 + bounded();
        br.x *= 1.0 + bounded();
    }
    return out;
}

SimulatedData simulate_with_truth(const NetworkCase& net_perturbed, const PmuPlacement& placement,
                                  double tve_bound, std::uint64_t seed) {
    if (tve_bound < 0.0) throw UsageError("tve_bound must be nonnegative");
    const PowerFlowSolution pf = solve_power_flow(net_perturbed);
    const AdmittanceModel model = build_admittance(net_perturbed);
    const BranchCurrents currents = branch_currents(model, pf.v);

    // Map branch index -> position in the admittance model's branch list.
    std::vector<std::size_t> branch_pos(net_perturbed.branches.size(), SIZE_MAX);
    for (std::size_t i = 0; i < model.branches.size(); ++i)
        branch_pos[model.branches[i].branch_index] = i;

    const auto channels = enumerate_channels(net_perturbed, placement);
    SimulatedData data;
    data.profile = pf.v;
    data.x_true = stack_state(pf.v);
    data.meas.y.resize(2 * channels.size());
    data.meas.true_y.resize(2 * channels.size());
    data.meas.sigma.resize(2 * channels.size());

    Rng rng(derive_seed(seed, 0x6d656173ull));
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const Channel& ch = channels[c];
        Complex value;
        if (ch.kind == Channel::Kind::Voltage) {
            value = pf.v[ch.bus_idx];
        } else {
            const std::size_t pos = branch_pos[ch.branch_index];
            value = ch.at_from_end ? currents.from[pos] : currents.to[pos];
        }
        const double mag = std::abs(value);
        const double sigma = tve_bound * mag / 3.0;
        Complex noise(0.0, 0.0);
        if (sigma > 0.0) {
            do {
                noise = Complex(rng.normal() * sigma, rng.normal() * sigma);
            } while (std::abs(noise) > tve_bound * mag);
        }
        data.meas.true_y[2 * c] = value.real();
        data.meas.true_y[2 * c + 1] = value.imag();
        data.meas.y[2 * c] = value.real() + noise.real();
        data.meas.y[2 * c + 1] = value.imag() + noise.imag();
        data.meas.sigma[2 * c] = sigma;
        data.meas.sigma[2 * c + 1] = sigma;
    }
    return data;
}

MeasurementVector simulate_measurements(const NetworkCase& net_perturbed,
                                        const PmuPlacement& placement, double tve_bound,
                                        std::uint64_t seed) {
    return simulate_with_truth(net_perturbed, placement, tve_bound, seed).meas;
}

Vector empirical_sigmas(const NetworkCase& net_perturbed, const PmuPlacement& placement,
                        double tve_bound, std::uint64_t seed, std::size_t samples) {
    if (samples < 2) throw UsageError("empirical_sigmas needs at least 2 samples");
    Vector sum, sumsq;
    for (std::size_t s = 0; s < samples; ++s) {
        const MeasurementVector mv =
            simulate_measurements(net_perturbed, placement, tve_bound, derive_seed(seed, s));
        if (sum.empty()) {
            sum.assign(mv.y.size(), 0.0);
            sumsq.assign(mv.y.size(), 0.0);
        }
        for (std::size_t i = 0; i < mv.y.size(); ++i) {
            const double d = mv.y[i] - mv.true_y[i];
            sum[i] += d;
            sumsq[i] += d * d;
        }
    }
    Vector sigma(sum.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        const double mean = sum[i] / static_cast<double>(samples);
        sigma[i] = std::sqrt(std::max(0.0, sumsq[i] / static_cast<double>(samples) - mean * mean));
    }
    return sigma;
}

UncertaintySpec build_uncertainty_spec(const NetworkCase& net_nominal, const PmuPlacement& placement,
                                       double max_rel_dev, double tve_bound,
                                       const MeasurementVector& y_true,
                                       const NetworkCase* net_perturbed) {
    const std::size_t nb = net_nominal.buses.size();
    const auto channels = enumerate_channels(net_nominal, placement);
    const std::size_t n = 2 * channels.size();
    if (y_true.true_y.size() != n)
        throw UsageError("uncertainty spec: measurement vector length mismatch");
    if (net_perturbed && net_perturbed->branches.size() != net_nominal.branches.size())
        throw UsageError("uncertainty spec: perturbed case must match the nominal topology");

    UncertaintySpec spec;

    // Branches that actually enter P through a current channel.
    std::vector<char> touched(net_nominal.branches.size(), 0);
    for (const Channel& ch : channels)
        if (ch.kind == Channel::Kind::Current) touched[ch.branch_index] = 1;
    for (std::size_t k = 0; k < touched.size(); ++k)
        if (touched[k]) spec.uncertain_branches.push_back(k);

    for (std::size_t k : spec.uncertain_branches) {
        const Branch& br = net_nominal.branches[k];
        const Complex q0 = nominal_q(br);
        double d_re = 0.0, d_im = 0.0;
        if (net_perturbed) {
            // Realized deviation of this concrete perturbed case.
            const Complex q1 = nominal_q(net_perturbed->branches[k]);
            d_re = std::abs(q1.real() - q0.real());
            d_im = std::abs(q1.imag() - q0.imag());
        } else {
            // Worst case over the (r, x) corner box, with a sampled grid
            // guarding against interior extrema.
            constexpr int kGrid = 10;
            for (int a = 0; a < kGrid; ++a) {
                for (int b = 0; b < kGrid; ++b) {
                    const double dr = -max_rel_dev + 2.0 * max_rel_dev * a / (kGrid - 1);
                    const double dx = -max_rel_dev + 2.0 * max_rel_dev * b / (kGrid - 1);
                    const Complex q = 1.0 / Complex(br.r * (1.0 + dr), br.x * (1.0 + dx)) +
                                      Complex(0.0, br.b_total / 2.0);
                    d_re = std::max(d_re, std::abs(q.real() - q0.real()));
                    d_im = std::max(d_im, std::abs(q.imag() - q0.imag()));
                }
            }
        }
        spec.delta_p.push_back(d_re);
        spec.delta_p.push_back(d_im);
    }

    // Sensitivity matrices: dP/d(Re q_k) and dP/d(Im q_k).
    for (std::size_t pi = 0; pi < spec.uncertain_branches.size(); ++pi) {
        const std::size_t k = spec.uncertain_branches[pi];
        const Branch& br = net_nominal.branches[k];
        SparseTriplets p_re, p_im;
        p_re.rows = p_im.rows = n;
        p_re.cols = p_im.cols = 2 * nb;
        for (std::size_t c = 0; c < channels.size(); ++c) {
            const Channel& ch = channels[c];
            if (ch.kind != Channel::Kind::Current || ch.branch_index != k) continue;
            const CoeffExpansion e = coeff_expansion(br, ch.at_from_end);
            const std::size_t f_idx = net_nominal.index_of(br.from_bus);
            const std::size_t t_idx = net_nominal.index_of(br.to_bus);
            place_complex_pair(p_re, 2 * c, nb, f_idx, t_idx, e.alpha_f, e.alpha_t);
            place_complex_pair(p_im, 2 * c, nb, f_idx, t_idx, Complex(0, 1) * e.alpha_f,
                               Complex(0, 1) * e.alpha_t);
        }
        spec.p_k.push_back(std::move(p_re));
        spec.p_k.push_back(std::move(p_im));
    }

    // The two chi_P recipes plus the elementwise bound xi.
    if (net_perturbed) {
        // Tight values from the realized perturbation: delta P directly.
        const Matrix p_pert =
            assemble_matrix(net_nominal, channels, nominal_q_table(*net_perturbed));
        Matrix delta = p_pert;
        const Matrix p_nom = assemble_matrix(net_nominal, channels, nominal_q_table(net_nominal));
        for (std::size_t i = 0; i < delta.data().size(); ++i) delta.data()[i] -= p_nom.data()[i];
        spec.chi_p = norm2_mat(delta);
        spec.xi = 0.0;
        for (double v : delta.data()) spec.xi = std::max(spec.xi, std::abs(v));
        spec.chi_p_max_param = 0.0;
        for (std::size_t k : spec.uncertain_branches) {
            spec.chi_p_max_param =
                std::max({spec.chi_p_max_param,
                          std::abs(net_perturbed->branches[k].r - net_nominal.branches[k].r),
                          std::abs(net_perturbed->branches[k].x - net_nominal.branches[k].x)});
        }
    } else {
        // A-priori bounds over the whole deviation box.
        Matrix bound(n, 2 * nb);
        for (std::size_t k = 0; k < spec.n_params(); ++k) {
            for (const auto& e : spec.p_k[k].entries)
                bound(e.i, e.j) += spec.delta_p[k] * std::abs(e.v);
        }
        spec.chi_p = norm2_mat(bound);
        spec.xi = 0.0;
        for (double v : bound.data()) spec.xi = std::max(spec.xi, v);
        spec.chi_p_max_param = 0.0;
        for (std::size_t k : spec.uncertain_branches) {
            spec.chi_p_max_param =
                std::max({spec.chi_p_max_param, max_rel_dev * std::abs(net_nominal.branches[k].r),
                          max_rel_dev * std::abs(net_nominal.branches[k].x)});
        }
    }

    // Measurement deviation bounds: TVE caps the complex error magnitude,
    // so each row of a channel inherits tve * |phasor|.
    spec.delta_y.resize(n);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const double mag = std::hypot(y_true.true_y[2 * c], y_true.true_y[2 * c + 1]);
        spec.delta_y[2 * c] = tve_bound * mag;
        spec.delta_y[2 * c + 1] = tve_bound * mag;
    }
    spec.chi_y = norm2_vec(spec.delta_y);
    return spec;
}

Matrix measurement_matrix_at(const NetworkCase& net_nominal, const PmuPlacement& placement,
                             const UncertaintySpec& spec, std::span<const double> eps) {
    if (eps.size() != spec.n_params()) throw UsageError("eps length must match parameter count");
    const auto channels = enumerate_channels(net_nominal, placement);
    std::vector<Complex> q = nominal_q_table(net_nominal);
    for (std::size_t pi = 0; pi < spec.uncertain_branches.size(); ++pi) {
        const std::size_t k = spec.uncertain_branches[pi];
        q[k] += Complex(spec.delta_p[2 * pi] * eps[2 * pi], spec.delta_p[2 * pi + 1] * eps[2 * pi + 1]);
    }
    return assemble_matrix(net_nominal, channels, q);
}

Matrix build_weights(std::span<const double> sigmas) {
    Matrix w(sigmas.size(), sigmas.size());
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (sigmas[i] < 0.0 || !std::isfinite(sigmas[i]))
            throw UsageError("sigma must be finite and nonnegative");
        w(i, i) = std::max(sigmas[i] * sigmas[i], kSigmaFloorVariance);
    }
    return w;
}

Vector stack_state(const ComplexVoltageProfile& v) {
    Vector x(2 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        x[i] = v[i].real();
        x[v.size() + i] = v[i].imag();
    }
    return x;
}

void write_measurement_csv(const std::string& path, const MeasurementModel& model,
                           const MeasurementVector& meas) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << "channel_id,kind,bus,branch_from,branch_to,value,true_value,sigma\n";
    char buf[128];
    for (std::size_t i = 0; i < model.n_meas; ++i) {
        const Channel& ch = model.channels[i / 2];
        const bool re = i % 2 == 0;
        const char* kind = ch.kind == Channel::Kind::Voltage ? (re ? "voltage-real" : "voltage-imag")
                                                             : (re ? "current-real" : "current-imag");
        std::snprintf(buf, sizeof buf, "%zu,%s,%d,%d,%d,%.17g,%.17g,%.17g\n", i, kind, ch.bus,
                      ch.branch_from, ch.branch_to, meas.y[i], meas.true_y[i], meas.sigma[i]);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace lsebu
