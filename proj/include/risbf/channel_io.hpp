#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "risbf/model.hpp"

namespace risbf {

// Channel replay format, version 1 (plain text, one realization per file):
//
//   risbf-channels 1
//   dims <n_tx> <n_ris> <n_users> <n_rx>
//   G
//   <n_ris lines of 2*n_tx numbers: re im re im ...>
//   U <k>
//   <n_rx lines of 2*n_ris numbers>
//   D <k>
//   <n_rx lines of 2*n_tx numbers>
//   (U k / D k repeated for k = 0..K-1)
//
// Numbers are written as C99 hexadecimal floating point ("%a"), so a
// write/read cycle reproduces every bit.

inline constexpr int kChannelFormatVersion = 1;

namespace detail {

inline void write_matrix(std::ostream& os, const CMat& m) {
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%a %a", m(r, c).real(), m(r, c).imag());
      if (c) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

inline double parse_double(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw std::runtime_error("channel file: bad number '" + tok + "'");
  return v;
}

inline CMat read_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  CMat m(rows, cols);
  std::string re, im;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(is >> re >> im)) throw std::runtime_error("channel file: truncated matrix");
      m(r, c) = cplx(parse_double(re), parse_double(im));
    }
  return m;
}

inline void expect_token(std::istream& is, const std::string& want) {
  std::string tok;
  if (!(is >> tok) || tok != want)
    throw std::runtime_error("channel file: expected '" + want + "', got '" + tok + "'");
}

}  // namespace detail

inline void write_channels(std::ostream& os, const ChannelSet& ch) {
  os << "risbf-channels " << kChannelFormatVersion << '\n';
  os << "dims " << ch.n_tx() << ' ' << ch.n_ris() << ' ' << ch.n_users() << ' ' << ch.n_rx() << '\n';
  os << "G\n";
  detail::write_matrix(os, ch.bs_ris);
  for (int k = 0; k < ch.n_users(); ++k) {
    os << "U " << k << '\n';
    detail::write_matrix(os, ch.ris_user[k]);
    os << "D " << k << '\n';
    detail::write_matrix(os, ch.direct[k]);
  }
}

inline ChannelSet read_channels(std::istream& is) {
  detail::expect_token(is, "risbf-channels");
  int version = 0;
  if (!(is >> version) || version != kChannelFormatVersion)
    throw std::runtime_error("channel file: unsupported version " + std::to_string(version));
  detail::expect_token(is, "dims");
  int nt = 0, ns = 0, k_users = 0, nr = 0;
  if (!(is >> nt >> ns >> k_users >> nr) || nt < 1 || ns < 1 || k_users < 1 || nr < 1)
    throw std::runtime_error("channel file: bad dims line");
  ChannelSet ch;
  detail::expect_token(is, "G");
  ch.bs_ris = detail::read_matrix(is, ns, nt);
  for (int k = 0; k < k_users; ++k) {
    detail::expect_token(is, "U");
    detail::expect_token(is, std::to_string(k));
    ch.ris_user.push_back(detail::read_matrix(is, nr, ns));
    detail::expect_token(is, "D");
    detail::expect_token(is, std::to_string(k));
    ch.direct.push_back(detail::read_matrix(is, nr, nt));
  }
  return ch;
}

inline void save_channels(const std::filesystem::path& path, const ChannelSet& ch) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_channels(os, ch);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

inline ChannelSet load_channels(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_channels(is);
}

}  // namespace risbf
