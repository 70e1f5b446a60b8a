#include "core/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace xrmdn {

namespace {

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

double draw_uniform_pm(RngState& rng, double bound) {
    return (2.0 * next_uniform(rng) - 1.0) * bound;
}

SubnetParams init_subnet(int n_components, int n_units, int input_width, bool recurrent,
                         RngState& rng) {
    const std::size_t n = static_cast<std::size_t>(n_components);
    const std::size_t k = static_cast<std::size_t>(n_units);
    const std::size_t w = static_cast<std::size_t>(input_width);
    const std::size_t units = recurrent ? 2 * k : k;

    SubnetParams p;
    p.recurrent = recurrent;

    const double b_direct_in = glorot_bound(w, 1);
    p.direct_in_w.resize(w);
    for (auto& x : p.direct_in_w) x = draw_uniform_pm(rng, b_direct_in);
    p.direct_in_b = 0.0;

    const double b_tanh_in = glorot_bound(w, k - 1);
    p.tanh_in_w.assign(k - 1, std::vector<double>(w));
    p.tanh_in_b.assign(k - 1, 0.0);
    for (auto& row : p.tanh_in_w)
        for (auto& x : row) x = draw_uniform_pm(rng, b_tanh_in);

    if (recurrent) {
        p.direct_rec_w = draw_uniform_pm(rng, glorot_bound(1, 1));
        p.direct_rec_b = 0.0;
        const double b_tanh_rec = glorot_bound(1, k - 1);
        p.tanh_rec_w.resize(k - 1);
        p.tanh_rec_b.assign(k - 1, 0.0);
        for (auto& x : p.tanh_rec_w) x = draw_uniform_pm(rng, b_tanh_rec);
    }

    const double b_mix = glorot_bound(units, n);
    p.mix_w.assign(n, std::vector<double>(units));
    p.mix_b.assign(n, 0.0);
    for (auto& row : p.mix_w)
        for (auto& x : row) x = draw_uniform_pm(rng, b_mix);
    return p;
}

// --- little-endian byte helpers -------------------------------------------

void put_bytes(std::string& out, const void* src, std::size_t n) {
    out.append(static_cast<const char*>(src), n);
}

void put_u32(std::string& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    put_bytes(out, b, 4);
}

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    put_bytes(out, b, 8);
}

class ByteReader {
public:
    ByteReader(const std::string& data, std::string path)
        : data_(data), path_(std::move(path)) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string magic() {
        need(4);
        std::string m = data_.substr(pos_, 4);
        pos_ += 4;
        return m;
    }

    bool exhausted() const { return pos_ == data_.size(); }

private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw DataError("truncated model file: " + path_);
        }
    }

    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

constexpr std::uint32_t kModelFormatVersion = 1;

const char* magic_for(ModelKind kind) {
    return kind == ModelKind::xrmdn ? "XRMD" : "XRMC";
}

}  // namespace

XrmdnModel init_model(int n_components, int n_units, int input_width, RngState& rng,
                      ModelKind kind, const ActivationConfig& activation) {
    if (n_components < 1) throw ConfigError("n_components must be >= 1");
    if (n_units < 2) throw ConfigError("n_units must be >= 2 (one direct + at least one tanh unit)");
    if (input_width < 1) throw ConfigError("input_width must be >= 1");
    validate(activation);

    const bool mean_weight_recurrence = (kind == ModelKind::xrmdn);
    XrmdnModel m;
    m.kind = kind;
    m.n_components = n_components;
    m.n_units = n_units;
    m.input_width = input_width;
    m.activation = activation;
    m.wrnn = init_subnet(n_components, n_units, input_width, mean_weight_recurrence, rng);
    m.mrnn = init_subnet(n_components, n_units, input_width, mean_weight_recurrence, rng);
    m.vrnn = init_subnet(n_components, n_units, 1, true, rng);
    return m;
}

std::size_t param_count(const ModelShaped& m) {
    std::size_t n = 0;
    visit_params(m, [&](const double&) { ++n; });
    return n;
}

std::vector<double> flatten_params(const ModelShaped& m) {
    std::vector<double> flat;
    flat.reserve(param_count(m));
    visit_params(m, [&](const double& x) { flat.push_back(x); });
    return flat;
}

void unflatten_params(ModelShaped& m, std::span<const double> flat) {
    std::size_t i = 0;
    visit_params(m, [&](double& x) {
        if (i >= flat.size()) throw ConfigError("flat parameter vector too short");
        x = flat[i++];
    });
    if (i != flat.size()) throw ConfigError("flat parameter vector too long");
}

ModelShaped shaped_like(const ModelShaped& m, double value) {
    ModelShaped out = m;
    visit_params(out, [&](double& x) { x = value; });
    return out;
}

RecurrentState initial_state(int n_components, double mean, double variance) {
    if (n_components < 1) throw ConfigError("n_components must be >= 1");
    if (!(variance > 0.0)) throw ConfigError("initial state variance must be positive");
    RecurrentState s;
    const std::size_t n = static_cast<std::size_t>(n_components);
    s.eta_prev.assign(n, 1.0 / static_cast<double>(n));
    s.mu_prev.assign(n, mean);
    s.sigma2_prev.assign(n, variance);
    s.resid_prev = 0.0;
    return s;
}

void save_model(const XrmdnModel& m, const std::string& path) {
    std::string out;
    out.append(magic_for(m.kind), 4);
    put_u32(out, kModelFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(m.n_components));
    put_u32(out, static_cast<std::uint32_t>(m.n_units));
    put_u32(out, static_cast<std::uint32_t>(m.input_width));
    put_f64(out, m.activation.xi);
    put_f64(out, m.activation.alpha_elu);
    put_u8(out, m.wrnn.recurrent ? 1 : 0);
    put_u8(out, m.mrnn.recurrent ? 1 : 0);
    put_u8(out, m.vrnn.recurrent ? 1 : 0);
    put_f64(out, m.norm.mean);
    put_f64(out, m.norm.stddev);
    visit_params(m, [&](const double& x) { put_f64(out, x); });
    if (m.warm.has_value()) {
        put_u8(out, 1);
        for (double x : m.warm->state.eta_prev) put_f64(out, x);
        for (double x : m.warm->state.mu_prev) put_f64(out, x);
        for (double x : m.warm->state.sigma2_prev) put_f64(out, x);
        put_f64(out, m.warm->state.resid_prev);
        for (double x : m.warm->last_input) put_f64(out, x);
    } else {
        put_u8(out, 0);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open model file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("failed writing model file: " + path);
}

XrmdnModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open model file: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    const std::string data = buf.str();

    ByteReader r(data, path);
    const std::string magic = r.magic();
    ModelKind kind;
    if (magic == "XRMD") {
        kind = ModelKind::xrmdn;
    } else if (magic == "XRMC") {
        kind = ModelKind::classic_rmdn;
    } else {
        throw DataError("not a model file (bad magic): " + path);
    }
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion) {
        throw DataError("unsupported model format version " + std::to_string(version) + ": " + path);
    }
    const int n = static_cast<int>(r.u32());
    const int k = static_cast<int>(r.u32());
    const int w = static_cast<int>(r.u32());
    if (n < 1 || k < 2 || w < 1 || n > 1'000'000 || k > 1'000'000 || w > 1'000'000) {
        throw DataError("corrupt model file (implausible dimensions): " + path);
    }
    ActivationConfig act;
    act.xi = r.f64();
    act.alpha_elu = r.f64();
    if (!(act.xi > 0.0) || !(act.alpha_elu > 0.0) || !(act.alpha_elu <= 1.0)) {
        throw DataError("corrupt model file (invalid activation constants): " + path);
    }
    const bool wrnn_rec = r.u8() != 0;
    const bool mrnn_rec = r.u8() != 0;
    const bool vrnn_rec = r.u8() != 0;
    if (!vrnn_rec || (wrnn_rec != mrnn_rec) || (wrnn_rec != (kind == ModelKind::xrmdn))) {
        throw DataError("inconsistent recurrence flags in model file: " + path);
    }

    RngState scratch;  // values are overwritten below
    XrmdnModel m = init_model(n, k, w, scratch, kind, act);
    m.norm.mean = r.f64();
    m.norm.stddev = r.f64();
    visit_params(m, [&](double& x) { x = r.f64(); });
    if (r.u8() != 0) {
        WarmStart warm;
        const std::size_t nc = static_cast<std::size_t>(n);
        warm.state.eta_prev.resize(nc);
        warm.state.mu_prev.resize(nc);
        warm.state.sigma2_prev.resize(nc);
        for (auto& x : warm.state.eta_prev) x = r.f64();
        for (auto& x : warm.state.mu_prev) x = r.f64();
        for (auto& x : warm.state.sigma2_prev) x = r.f64();
        warm.state.resid_prev = r.f64();
        warm.last_input.resize(static_cast<std::size_t>(w));
        for (auto& x : warm.last_input) x = r.f64();
        m.warm = std::move(warm);
    }
    if (!r.exhausted()) throw DataError("trailing bytes in model file: " + path);
    return m;
}

std::string model_to_text(const XrmdnModel& m) {
    std::ostringstream os;
    os.precision(17);
    os << "kind " << (m.kind == ModelKind::xrmdn ? "xrmdn" : "classic_rmdn") << "\n";
    os << "components " << m.n_components << "\n";
    os << "units " << m.n_units << "\n";
    os << "input_width " << m.input_width << "\n";
    os << "xi " << m.activation.xi << "\n";
    os << "alpha_elu " << m.activation.alpha_elu << "\n";
    os << "norm_mean " << m.norm.mean << "\n";
    os << "norm_stddev " << m.norm.stddev << "\n";
    const char* names[3] = {"wrnn", "mrnn", "vrnn"};
    const SubnetParams* nets[3] = {&m.wrnn, &m.mrnn, &m.vrnn};
    for (int s = 0; s < 3; ++s) {
        const SubnetParams& p = *nets[s];
        os << "[" << names[s] << "]\n";
        os << "direct_in";
        for (double x : p.direct_in_w) os << " " << x;
        os << " | " << p.direct_in_b << "\n";
        for (std::size_t k = 0; k < p.tanh_in_w.size(); ++k) {
            os << "tanh_in." << k;
            for (double x : p.tanh_in_w[k]) os << " " << x;
            os << " | " << p.tanh_in_b[k] << "\n";
        }
        if (p.recurrent) {
            os << "direct_rec " << p.direct_rec_w << " | " << p.direct_rec_b << "\n";
            for (std::size_t k = 0; k < p.tanh_rec_w.size(); ++k) {
                os << "tanh_rec." << k << " " << p.tanh_rec_w[k] << " | " << p.tanh_rec_b[k] << "\n";
            }
        }
        for (std::size_t i = 0; i < p.mix_w.size(); ++i) {
            os << "mix." << i;
            for (double x : p.mix_w[i]) os << " " << x;
            os << " | " << p.mix_b[i] << "\n";
        }
    }
    if (m.warm.has_value()) {
        os << "[warm]\n";
        os << "eta";
        for (double x : m.warm->state.eta_prev) os << " " << x;
        os << "\nmu";
        for (double x : m.warm->state.mu_prev) os << " " << x;
        os << "\nsigma2";
        for (double x : m.warm->state.sigma2_prev) os << " " << x;
        os << "\nresid " << m.warm->state.resid_prev << "\n";
        os << "last_input";
        for (double x : m.warm->last_input) os << " " << x;
        os << "\n";
    }
    return os.str();
}

}  // namespace xrmdn
