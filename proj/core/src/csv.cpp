#include "qwork/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <system_error>

#include "qwork/errors.hpp"
#include "qwork/format.hpp"

namespace qwork {

std::string format_number(double x, int digits) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, digits);
  if (res.ec != std::errc()) throw DomainError("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

void write_distribution_csv(std::ostream& os, const WorkDistribution& dist) {
  os << "w,p,Q\n";
  double acc = 0.0;
  for (const auto& p : dist.support()) {
    acc += p.weight;
    os << format_number(p.w) << ',' << format_number(p.weight) << ',' << format_number(acc)
       << '\n';
  }
}

void write_distribution_csv(const std::string& path, const WorkDistribution& dist) {
  std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!os) throw Error("cannot open " + path + " for writing");
  write_distribution_csv(os, dist);
  if (!os.flush()) throw Error("write failed for " + path);
}

}  // namespace qwork
