#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "deepls/network.hpp"

namespace deepls {

// Layout: see docs/checkpoint.md.
inline constexpr std::array<char, 8> checkpoint_magic{'D', 'L', 'S', 'N', 'E', 'T', '\0', '\0'};
inline constexpr std::uint32_t checkpoint_endian_tag = 0x01020304u;
inline constexpr std::uint32_t checkpoint_version = 1;

namespace detail {

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is, bool swap)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is)
        fail(ErrorKind::io, "checkpoint is truncated");
    if (swap) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        v = std::bit_cast<T>(bytes);
    }
    return v;
}

} // namespace detail

/// Writes in host byte order; the tag lets readers on the other endianness swap.
inline void write_checkpoint(std::ostream& os, const SolutionNetwork& net)
{
    const auto& arch = net.architecture();
    os.write(checkpoint_magic.data(), checkpoint_magic.size());
    detail::put<std::uint32_t>(os, checkpoint_endian_tag);
    detail::put<std::uint32_t>(os, checkpoint_version);
    detail::put<std::uint32_t>(os, std::uint32_t(arch.depth));
    detail::put<std::uint32_t>(os, std::uint32_t(arch.width));
    detail::put<std::uint32_t>(os, std::uint32_t(arch.input_dim));
    detail::put<std::uint64_t>(os, std::uint64_t(net.parameter_count()));
    const Vector& theta = net.parameters();
    os.write(reinterpret_cast<const char*>(theta.data()), std::streamsize(theta.size() * sizeof(double)));
    if (!os)
        fail(ErrorKind::io, "failed to write checkpoint");
}

inline SolutionNetwork read_checkpoint(std::istream& is)
{
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != checkpoint_magic)
        fail(ErrorKind::io, "not a checkpoint file (bad magic)");
    std::uint32_t tag = 0;
    is.read(reinterpret_cast<char*>(&tag), sizeof tag);
    bool swap = false;
    if (tag == 0x04030201u)
        swap = true;
    else if (tag != checkpoint_endian_tag)
        fail(ErrorKind::io, "checkpoint has an unknown endianness tag");
    const auto version = detail::get<std::uint32_t>(is, swap);
    if (version != checkpoint_version)
        fail(ErrorKind::io, "unsupported checkpoint version " + std::to_string(version));
    Architecture arch;
    arch.depth = int(detail::get<std::uint32_t>(is, swap));
    arch.width = int(detail::get<std::uint32_t>(is, swap));
    arch.input_dim = int(detail::get<std::uint32_t>(is, swap));
    const auto count = detail::get<std::uint64_t>(is, swap);
    for (int v : {arch.depth, arch.width, arch.input_dim})
        if (v < 1 || v > (1 << 20))
            fail(ErrorKind::io, "checkpoint header has an implausible architecture");
    SolutionNetwork net(arch);
    if (count != net.parameter_count())
        fail(ErrorKind::io, "checkpoint parameter count does not match its architecture");
    Vector theta(static_cast<Eigen::Index>(count));
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        theta[i] = detail::get<double>(is, swap);
    net.set_parameters(theta);
    return net;
}

inline void save_checkpoint(const std::string& path, const SolutionNetwork& net)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        fail(ErrorKind::io, "cannot open " + path + " for writing");
    write_checkpoint(os, net);
}

inline SolutionNetwork load_checkpoint(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        fail(ErrorKind::io, "cannot open " + path);
    return read_checkpoint(is);
}

} // namespace deepls
