#include "eigtemp/cache.hpp"

#include "eigtemp/errors.hpp"

#include <cstring>
#include <fstream>

namespace eigtemp {

namespace {

constexpr char kMagic[8] = {'E', 'I', 'G', 'T', 'M', 'P', 'C', 'H'};
constexpr std::uint32_t kVersion = 1;

template <class T> void put(std::ostream& out, const T& v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

void put_doubles(std::ostream& out, const double* p, std::size_t n)
{
    put<std::uint64_t>(out, n);
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

template <class T> T get(std::istream& in)
{
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw IntegrityError("cache: truncated file");
    return v;
}

std::vector<double> get_doubles(std::istream& in, std::size_t expected)
{
    const auto n = get<std::uint64_t>(in);
    if (n != expected)
        throw IntegrityError("cache: array length mismatch");
    std::vector<double> v(n);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
        throw IntegrityError("cache: truncated file");
    return v;
}

} // namespace

HamiltonianBundle CachedRun::rebuild() const
{
    const BasisTable basis(particles, levels);
    const CouplingTensor v(levels, strength, coupling_seed, unit_draws);
    return assemble(basis, spectrum, v);
}

void write_cache(const std::filesystem::path& path, const HamiltonianBundle& bundle, const EigenDecomposition& d)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out)
            throw std::runtime_error("cache: cannot open " + tmp.string());
        out.write(kMagic, sizeof kMagic);
        put(out, kVersion);
        put<std::int32_t>(out, bundle.basis.particles());
        put<std::int32_t>(out, bundle.basis.levels());
        put(out, bundle.couplings.strength());
        put<std::int32_t>(out, bundle.spectrum.mode == SpectrumMode::random ? 1 : 0);
        put<std::uint64_t>(out, bundle.spectrum.seed);
        put<std::uint64_t>(out, bundle.couplings.seed());
        put_doubles(out, bundle.spectrum.energies.data(), bundle.spectrum.energies.size());
        const auto draws = bundle.couplings.unit_draws();
        put_doubles(out, draws.data(), draws.size());
        put_doubles(out, d.values.data(), d.values.size());
        put_doubles(out, d.vectors.data(), static_cast<std::size_t>(d.vectors.size()));
        if (!out)
            throw std::runtime_error("cache: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CachedRun read_cache(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cache: cannot open " + path.string());
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw IntegrityError("cache: bad magic in " + path.string());
    if (get<std::uint32_t>(in) != kVersion)
        throw IntegrityError("cache: unsupported version in " + path.string());
    CachedRun c;
    c.particles = get<std::int32_t>(in);
    c.levels = get<std::int32_t>(in);
    c.strength = get<double>(in);
    c.spectrum.mode = get<std::int32_t>(in) ? SpectrumMode::random : SpectrumMode::deterministic;
    c.spectrum.seed = get<std::uint64_t>(in);
    c.coupling_seed = get<std::uint64_t>(in);
    if (c.particles < 1 || c.levels < 1)
        throw IntegrityError("cache: bad (N, M)");
    const std::size_t m = c.levels;
    const std::size_t pairs = m * (m + 1) / 2;
    const std::size_t n = basis_dimension(c.particles, c.levels);
    c.spectrum.energies = get_doubles(in, m);
    c.unit_draws = get_doubles(in, pairs * (pairs + 1) / 2);
    const auto val = get_doubles(in, n);
    c.eigen.values = Eigen::Map<const Eigen::VectorXd>(val.data(), n);
    const auto vec = get_doubles(in, n * n);
    c.eigen.vectors = Eigen::Map<const Eigen::MatrixXd>(vec.data(), n, n);
    if (in.peek() != std::char_traits<char>::eof())
        throw IntegrityError("cache: trailing bytes in " + path.string());
    return c;
}

} // namespace eigtemp
