#include "dawc/matrix_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace dawc {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "binary matrix format assumes a little-endian host");

void write_matrix(std::ostream& out, const CMatrix& m) {
    if (m.rows() > 0xffffffffLL || m.cols() > 0xffffffffLL) throw std::invalid_argument("matrix too large");
    const auto rows = static_cast<std::uint32_t>(m.rows());
    const auto cols = static_cast<std::uint32_t>(m.cols());
    out.write(kMatrixMagic, sizeof kMatrixMagic);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double re = m(r, c).real();
            const double im = m(r, c).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
    }
    if (!out) throw std::runtime_error("matrix write failed");
}

CMatrix read_matrix(std::istream& in) {
    char magic[8];
    std::uint32_t rows = 0, cols = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in) throw std::runtime_error("truncated matrix header");
    if (std::memcmp(magic, kMatrixMagic, 8) != 0) throw std::runtime_error("bad matrix magic");
    CMatrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            double re = 0.0, im = 0.0;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            m(r, c) = cplx(re, im);
        }
    }
    if (!in) throw std::runtime_error("truncated matrix payload");
    return m;
}

void write_matrix_file(const std::filesystem::path& path, const CMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    write_matrix(out, m);
}

CMatrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_matrix(in);
}

namespace {

json frontend_json(const FrontendConfig& c) {
    return {{"architecture", std::string(to_string(c.architecture))},
            {"f_p_hz", c.f_p_hz},
            {"f_c_hz", c.f_c_hz},
            {"f_s_hz", c.f_s_hz},
            {"n", c.n},
            {"p", c.p},
            {"L", c.L},
            {"r", c.r},
            {"N", c.N},
            {"seed", c.seed}};
}

FrontendConfig frontend_from(const json& j) {
    FrontendConfig c;
    c.architecture = architecture_from_string(j.at("architecture").get<std::string>());
    c.f_p_hz = j.at("f_p_hz").get<double>();
    c.f_c_hz = j.at("f_c_hz").get<double>();
    c.f_s_hz = j.at("f_s_hz").get<double>();
    c.n = j.at("n").get<int>();
    c.p = j.at("p").get<int>();
    c.L = j.at("L").get<int>();
    c.r = j.at("r").get<int>();
    c.N = j.at("N").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void save_measurement(const std::filesystem::path& dir,
                      const FrontendConfig& cfg,
                      const MultibandSpec& spec,
                      const MeasurementSet& ms) {
    std::filesystem::create_directories(dir);
    json j;
    j["frontend"] = frontend_json(cfg);
    j["spec"] = json::parse(to_json(spec));
    j["snr_db"] = ms.snr_db ? json(*ms.snr_db) : json(nullptr);
    j["noise_seed"] = ms.seed;
    {
        std::ofstream out(dir / "config.json");
        out << j.dump(2) << '\n';
        if (!out) throw std::runtime_error("cannot write config.json");
    }
    write_matrix_file(dir / "A.bin", ms.A);
    write_matrix_file(dir / "X.bin", ms.X);
    write_matrix_file(dir / "Y.bin", ms.Y);

    std::ofstream man(dir / "manifest.txt");
    man << "frontend_seed " << cfg.seed << '\n';
    man << "noise_seed " << ms.seed << '\n';
    man << "snr_db " << (ms.snr_db ? std::to_string(*ms.snr_db) : std::string("noiseless")) << '\n';
    man << "realized_snr_db " << std::setprecision(17) << ms.realized_snr_db() << '\n';
    if (!man) throw std::runtime_error("cannot write manifest.txt");
}

StoredMeasurement load_measurement(const std::filesystem::path& dir) {
    std::ifstream in(dir / "config.json");
    if (!in) throw std::runtime_error("missing config.json in " + dir.string());
    const json j = json::parse(in);
    StoredMeasurement st;
    st.frontend = frontend_from(j.at("frontend"));
    st.spec = spec_from_json(j.at("spec").dump());
    if (!j.at("snr_db").is_null()) st.measurement.snr_db = j.at("snr_db").get<double>();
    st.measurement.seed = j.at("noise_seed").get<std::uint64_t>();
    st.measurement.A = read_matrix_file(dir / "A.bin");
    st.measurement.X = read_matrix_file(dir / "X.bin");
    st.measurement.Y = read_matrix_file(dir / "Y.bin");
    if (st.measurement.A.cols() != st.measurement.X.rows() || st.measurement.Y.rows() != st.measurement.A.rows() ||
        st.measurement.Y.cols() != st.measurement.X.cols())
        throw std::runtime_error("stored matrices are not conformable");
    st.measurement.E = st.measurement.Y - st.measurement.A * st.measurement.X;
    return st;
}

}  // namespace dawc
