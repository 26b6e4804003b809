#include "ssid/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace ssid {

namespace {

constexpr std::string_view kSnapshotMagic = "SSIDSNP1";
constexpr std::uint32_t kSnapshotVersion = 1;

// ---- CRC32 (polynomial 0xEDB88320) ----

std::uint32_t crc32(const std::uint8_t* data, std::size_t len) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

// ---- little-endian byte buffers ----

struct ByteWriter {
    std::vector<std::uint8_t> bytes;

    void u8(std::uint8_t v) { bytes.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(std::string_view s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
};

struct ByteReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos = 0;

    void need(std::size_t count) const {
        if (pos + count > size)
            throw IoError("truncated payload at byte " + std::to_string(pos));
    }
    std::uint8_t u8() {
        need(1);
        return data[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
};

void write_file(const std::filesystem::path& path, const void* data, std::size_t len) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

// ---- text helpers ----

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) tokens.push_back(tok);
    return tokens;
}

std::uint64_t parse_u64(const std::string& token, const char* what) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
        throw IoError(std::string("malformed ") + what + ": '" + token + "'");
    return v;
}

class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path) : path_(path), in_(path) {
        if (!in_) throw IoError("cannot open for reading: " + path.string());
    }

    /// Next non-empty line; returns false at EOF.
    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++lineno_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw IoError(path_.string() + ":" + std::to_string(lineno_) + ": " + msg);
    }

    std::string expect(const std::string& what) {
        std::string line;
        if (!next(line)) fail("unexpected end of file, expected " + what);
        return line;
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t lineno_ = 0;
};

void write_matrix_block(std::ostream& out, const char* name, const Matrix& m) {
    out << "# matrix " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << " ";
            out << format_double(m(i, j));
        }
        out << "\n";
    }
}

Matrix read_matrix_block(LineReader& lr, const std::string& header, const char* name) {
    const auto tokens = split_ws(header);
    if (tokens.size() != 5 || tokens[0] != "#" || tokens[1] != "matrix" || tokens[2] != name)
        lr.fail(std::string("expected '# matrix ") + name + " <rows> <cols>' header");
    const std::size_t rows = parse_u64(tokens[3], "matrix rows");
    const std::size_t cols = parse_u64(tokens[4], "matrix cols");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto vals = split_ws(lr.expect("matrix row"));
        if (vals.size() != cols) lr.fail("matrix row has wrong number of entries");
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = parse_double(vals[j]);
    }
    return m;
}

std::string midpoint_name(MidpointRule r) {
    return r == MidpointRule::ZeroOrderHold ? "zoh" : "linear";
}

MidpointRule midpoint_from_name(const std::string& s) {
    if (s == "zoh") return MidpointRule::ZeroOrderHold;
    if (s == "linear") return MidpointRule::LinearInterpolation;
    throw IoError("unknown midpoint rule: " + s);
}

} // namespace

std::string format_double(double v) {
    std::array<char, 64> buf;
    const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw IoError("failed to format double");
    return std::string(buf.data(), p);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
        throw IoError("malformed number: '" + token + "'");
    return v;
}

void write_snapshots(const SnapshotSet& data, const std::filesystem::path& path) {
    if (path.extension() == ".ssb")
        write_snapshots_binary(data, path);
    else
        write_snapshots_text(data, path);
}

void write_snapshots_text(const SnapshotSet& data, const std::filesystem::path& path) {
    data.validate();
    std::ostringstream out;
    out << "# stablesysid snapshots 1\n";
    out << "# n " << data.state_dim() << "\n";
    out << "# trajectories " << data.trajectories.size() << "\n";
    for (std::size_t k = 0; k < data.trajectories.size(); ++k) {
        const Trajectory& t = data.trajectories[k];
        out << "# trajectory " << k << " samples " << t.grid.samples() << " t0 "
            << format_double(t.grid.t0) << " dt " << format_double(t.grid.dt) << " inputs "
            << t.input_dim() << " midpoint "
            << midpoint_name(t.inputs ? t.inputs->midpoint_rule
                                      : MidpointRule::LinearInterpolation)
            << " derivatives " << (t.derivatives ? 1 : 0) << "\n";
        const std::size_t n = t.state_dim();
        for (std::size_t col = 0; col < t.grid.samples(); ++col) {
            for (std::size_t i = 0; i < n; ++i) {
                if (i) out << " ";
                out << format_double(t.states(i, col));
            }
            if (t.inputs)
                for (std::size_t i = 0; i < t.input_dim(); ++i)
                    out << " " << format_double(t.inputs->samples(i, col));
            if (t.derivatives)
                for (std::size_t i = 0; i < n; ++i)
                    out << " " << format_double((*t.derivatives)(i, col));
            out << "\n";
        }
    }
    const std::string s = out.str();
    write_file(path, s.data(), s.size());
}

void write_snapshots_binary(const SnapshotSet& data, const std::filesystem::path& path) {
    data.validate();
    ByteWriter w;
    w.raw(kSnapshotMagic);
    w.u32(kSnapshotVersion);
    w.u64(data.state_dim());
    w.u64(data.trajectories.size());
    for (const Trajectory& t : data.trajectories) {
        w.u64(t.grid.samples());
        w.f64(t.grid.t0);
        w.f64(t.grid.dt);
        w.u64(t.input_dim());
        w.u8(t.inputs && t.inputs->midpoint_rule == MidpointRule::ZeroOrderHold ? 1 : 0);
        w.u8(t.derivatives ? 1 : 0);
        const std::size_t n = t.state_dim();
        for (std::size_t col = 0; col < t.grid.samples(); ++col) {
            for (std::size_t i = 0; i < n; ++i) w.f64(t.states(i, col));
            if (t.inputs)
                for (std::size_t i = 0; i < t.input_dim(); ++i) w.f64(t.inputs->samples(i, col));
            if (t.derivatives)
                for (std::size_t i = 0; i < n; ++i) w.f64((*t.derivatives)(i, col));
        }
    }
    const std::uint32_t crc =
        crc32(w.bytes.data() + kSnapshotMagic.size(), w.bytes.size() - kSnapshotMagic.size());
    w.u32(crc);
    write_file(path, w.bytes.data(), w.bytes.size());
}

namespace {

SnapshotSet read_snapshots_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kSnapshotMagic.size() ||
        std::memcmp(bytes.data(), kSnapshotMagic.data(), kSnapshotMagic.size()) != 0)
        throw IoError("malformed header at byte 0: bad magic");
    if (bytes.size() < kSnapshotMagic.size() + 4 + 4)
        throw IoError("truncated payload at byte " + std::to_string(bytes.size()));

    // Parse against the payload only; the trailing CRC is verified afterwards,
    // so truncation and corruption report as distinct errors.
    const std::size_t payload_end = bytes.size() - 4;
    ByteReader r{bytes.data(), payload_end, kSnapshotMagic.size()};
    const std::uint32_t version = r.u32();
    if (version != kSnapshotVersion)
        throw IoError("version mismatch at byte " + std::to_string(kSnapshotMagic.size()) +
                      ": file version " + std::to_string(version));
    const std::size_t n = r.u64();
    const std::size_t ntraj = r.u64();
    if (n == 0 || ntraj == 0) throw IoError("malformed header: zero dimension or trajectories");

    SnapshotSet data;
    for (std::size_t k = 0; k < ntraj; ++k) {
        Trajectory t;
        const std::size_t samples = r.u64();
        t.grid.t0 = r.f64();
        t.grid.dt = r.f64();
        const std::size_t m = r.u64();
        const std::uint8_t midpoint = r.u8();
        const std::uint8_t has_deriv = r.u8();
        if (samples == 0) throw IoError("malformed trajectory header: zero samples");
        t.grid.steps = samples - 1;
        t.states = Matrix(n, samples);
        if (m > 0) {
            t.inputs = InputSignal{Matrix(m, samples), midpoint == 1
                                                           ? MidpointRule::ZeroOrderHold
                                                           : MidpointRule::LinearInterpolation};
        }
        if (has_deriv) t.derivatives = Matrix(n, samples);
        for (std::size_t col = 0; col < samples; ++col) {
            for (std::size_t i = 0; i < n; ++i) t.states(i, col) = r.f64();
            for (std::size_t i = 0; i < m; ++i) t.inputs->samples(i, col) = r.f64();
            if (has_deriv)
                for (std::size_t i = 0; i < n; ++i) (*t.derivatives)(i, col) = r.f64();
        }
        data.trajectories.push_back(std::move(t));
    }
    if (r.pos != payload_end)
        throw IoError("malformed payload: " + std::to_string(payload_end - r.pos) +
                      " unexpected trailing bytes at byte " + std::to_string(r.pos));

    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[payload_end]) |
        static_cast<std::uint32_t>(bytes[payload_end + 1]) << 8 |
        static_cast<std::uint32_t>(bytes[payload_end + 2]) << 16 |
        static_cast<std::uint32_t>(bytes[payload_end + 3]) << 24;
    const std::uint32_t actual_crc = crc32(bytes.data() + kSnapshotMagic.size(),
                                           payload_end - kSnapshotMagic.size());
    if (stored_crc != actual_crc)
        throw IoError("checksum failure: stored " + std::to_string(stored_crc) + ", computed " +
                      std::to_string(actual_crc));
    data.validate();
    return data;
}

SnapshotSet read_snapshots_text(const std::filesystem::path& path) {
    LineReader lr(path);
    auto head = split_ws(lr.expect("snapshot header"));
    if (head.size() != 4 || head[0] != "#" || head[1] != "stablesysid" || head[2] != "snapshots")
        lr.fail("malformed header: expected '# stablesysid snapshots <version>'");
    if (parse_u64(head[3], "version") != 1) lr.fail("version mismatch");

    auto nline = split_ws(lr.expect("state dimension"));
    if (nline.size() != 3 || nline[1] != "n") lr.fail("expected '# n <dim>'");
    const std::size_t n = parse_u64(nline[2], "state dimension");

    auto tline = split_ws(lr.expect("trajectory count"));
    if (tline.size() != 3 || tline[1] != "trajectories") lr.fail("expected '# trajectories <k>'");
    const std::size_t ntraj = parse_u64(tline[2], "trajectory count");

    SnapshotSet data;
    for (std::size_t k = 0; k < ntraj; ++k) {
        auto h = split_ws(lr.expect("trajectory header"));
        if (h.size() != 15 || h[1] != "trajectory" || h[3] != "samples" || h[5] != "t0" ||
            h[7] != "dt" || h[9] != "inputs" || h[11] != "midpoint" || h[13] != "derivatives")
            lr.fail("malformed trajectory header");
        Trajectory t;
        const std::size_t samples = parse_u64(h[4], "samples");
        if (samples == 0) lr.fail("zero samples in trajectory header");
        t.grid = TimeGrid{parse_double(h[6]), parse_double(h[8]), samples - 1};
        const std::size_t m = parse_u64(h[10], "input dimension");
        const MidpointRule rule = midpoint_from_name(h[12]);
        const bool has_deriv = parse_u64(h[14], "derivative flag") != 0;

        t.states = Matrix(n, samples);
        if (m > 0) t.inputs = InputSignal{Matrix(m, samples), rule};
        if (has_deriv) t.derivatives = Matrix(n, samples);
        const std::size_t want = n + m + (has_deriv ? n : 0);
        for (std::size_t col = 0; col < samples; ++col) {
            const auto vals = split_ws(lr.expect("sample row"));
            if (vals.size() != want) lr.fail("sample row has wrong number of values");
            std::size_t idx = 0;
            for (std::size_t i = 0; i < n; ++i) t.states(i, col) = parse_double(vals[idx++]);
            for (std::size_t i = 0; i < m; ++i)
                t.inputs->samples(i, col) = parse_double(vals[idx++]);
            if (has_deriv)
                for (std::size_t i = 0; i < n; ++i)
                    (*t.derivatives)(i, col) = parse_double(vals[idx++]);
        }
        data.trajectories.push_back(std::move(t));
    }
    data.validate();
    return data;
}

} // namespace

SnapshotSet read_snapshots(const std::filesystem::path& path) {
    {
        std::ifstream probe(path, std::ios::binary);
        if (!probe) throw IoError("cannot open for reading: " + path.string());
        char magic[8] = {};
        probe.read(magic, 8);
        if (probe.gcount() == 8 && std::memcmp(magic, kSnapshotMagic.data(), 8) == 0)
            return read_snapshots_binary(read_file(path));
    }
    return read_snapshots_text(path);
}

void write_model(const ModelFile& mf, const std::filesystem::path& path) {
    if (mf.model.a.rows() != mf.model.a.cols() || mf.model.a.rows() == 0)
        throw DimensionError("write_model: A must be square and nonempty");
    if (mf.model.provenance == Provenance::StableParameterized && !mf.params)
        throw ConfigError("write_model: stable-parameterized model requires raw parameters");
    std::ostringstream out;
    out << "# stablesysid model 1\n";
    out << "# provenance " << to_string(mf.model.provenance) << "\n";
    write_matrix_block(out, "a", mf.model.a);
    if (mf.model.b) write_matrix_block(out, "b", *mf.model.b);
    if (mf.params) {
        write_matrix_block(out, "jbar", mf.params->jbar);
        write_matrix_block(out, "rbar", mf.params->rbar);
        write_matrix_block(out, "qbar", mf.params->qbar);
        if (mf.params->bbar) write_matrix_block(out, "bbar", *mf.params->bbar);
    }
    const std::string s = out.str();
    write_file(path, s.data(), s.size());
}

ModelFile read_model(const std::filesystem::path& path) {
    LineReader lr(path);
    auto head = split_ws(lr.expect("model header"));
    if (head.size() != 4 || head[0] != "#" || head[1] != "stablesysid" || head[2] != "model")
        lr.fail("malformed header: expected '# stablesysid model <version>'");
    if (parse_u64(head[3], "version") != 1) lr.fail("version mismatch");

    auto prov = split_ws(lr.expect("provenance"));
    if (prov.size() != 3 || prov[1] != "provenance") lr.fail("expected '# provenance <kind>'");

    ModelFile mf;
    mf.model.provenance = provenance_from_string(prov[2]);
    mf.model.a = read_matrix_block(lr, lr.expect("matrix a"), "a");

    std::string line;
    std::optional<Matrix> jbar, rbar, qbar, bbar;
    while (lr.next(line)) {
        const auto tokens = split_ws(line);
        if (tokens.size() != 5 || tokens[1] != "matrix") lr.fail("unexpected content after model");
        const std::string& name = tokens[2];
        if (name == "b")
            mf.model.b = read_matrix_block(lr, line, "b");
        else if (name == "jbar")
            jbar = read_matrix_block(lr, line, "jbar");
        else if (name == "rbar")
            rbar = read_matrix_block(lr, line, "rbar");
        else if (name == "qbar")
            qbar = read_matrix_block(lr, line, "qbar");
        else if (name == "bbar")
            bbar = read_matrix_block(lr, line, "bbar");
        else
            lr.fail("unknown matrix block '" + name + "'");
    }
    if (jbar || rbar || qbar) {
        if (!jbar || !rbar || !qbar) lr.fail("incomplete stable parameter blocks");
        mf.params = StableParams{std::move(*jbar), std::move(*rbar), std::move(*qbar),
                                 std::move(bbar)};
        mf.params->validate();
    }
    if (mf.model.provenance == Provenance::StableParameterized && !mf.params)
        throw IoError(path.string() + ": stable-parameterized model lacks raw parameters");
    return mf;
}

void write_basis(const PodBasis& basis, const std::filesystem::path& path) {
    if (basis.r == 0 || basis.ur.cols() != basis.r)
        throw DimensionError("write_basis: inconsistent rank");
    std::ostringstream out;
    out << "# stablesysid basis 1\n";
    out << "# n " << basis.ur.rows() << " r " << basis.r << " sigmas " << basis.sigma_all.size()
        << "\n";
    out << "# energy " << format_double(basis.energy_captured) << " tail "
        << format_double(basis.tail_bound) << "\n";
    out << "# sigma\n";
    for (std::size_t i = 0; i < basis.sigma_all.size(); ++i) {
        if (i) out << " ";
        out << format_double(basis.sigma_all[i]);
    }
    out << "\n";
    write_matrix_block(out, "ur", basis.ur);
    const std::string s = out.str();
    write_file(path, s.data(), s.size());
}

PodBasis read_basis(const std::filesystem::path& path) {
    LineReader lr(path);
    auto head = split_ws(lr.expect("basis header"));
    if (head.size() != 4 || head[0] != "#" || head[1] != "stablesysid" || head[2] != "basis")
        lr.fail("malformed header: expected '# stablesysid basis <version>'");
    if (parse_u64(head[3], "version") != 1) lr.fail("version mismatch");

    auto dims = split_ws(lr.expect("basis dimensions"));
    if (dims.size() != 7 || dims[1] != "n" || dims[3] != "r" || dims[5] != "sigmas")
        lr.fail("expected '# n <n> r <r> sigmas <k>'");
    PodBasis basis;
    const std::size_t n = parse_u64(dims[2], "n");
    basis.r = parse_u64(dims[4], "r");
    const std::size_t nsig = parse_u64(dims[6], "sigma count");

    auto energy = split_ws(lr.expect("energy line"));
    if (energy.size() != 5 || energy[1] != "energy" || energy[3] != "tail")
        lr.fail("expected '# energy <v> tail <v>'");
    basis.energy_captured = parse_double(energy[2]);
    basis.tail_bound = parse_double(energy[4]);

    auto sig_head = split_ws(lr.expect("sigma header"));
    if (sig_head.size() != 2 || sig_head[1] != "sigma") lr.fail("expected '# sigma'");
    const auto sig_vals = split_ws(lr.expect("sigma values"));
    if (sig_vals.size() != nsig) lr.fail("wrong number of singular values");
    basis.sigma_all.reserve(nsig);
    for (const auto& v : sig_vals) basis.sigma_all.push_back(parse_double(v));

    basis.ur = read_matrix_block(lr, lr.expect("matrix ur"), "ur");
    if (basis.ur.rows() != n || basis.ur.cols() != basis.r)
        lr.fail("basis matrix shape does not match header");
    return basis;
}

} // namespace ssid
