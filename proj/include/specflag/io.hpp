#pragma once

#include <string>

#include "specflag/hsproj.hpp"
#include "specflag/tuples.hpp"

namespace specflag {

/// On-disk tuple document:
///   {"k": int, "n": int,
///    "matrices": [ [ [ [re, im], ... row ], ... ] ],
///    "labels": [ "..." ] }          (labels optional)
/// Numbers are [re, im] pairs, rows in row-major order.
struct TupleFile {
    int k = 0;
    int n = 0;
    std::vector<CMatrix> matrices;
    std::vector<std::string> labels;
};

/// Throws Error with a descriptive message on malformed input.
TupleFile read_tuple_file(const std::string& path);
void write_tuple_file(const std::string& path, const TupleFile& doc);

/// Region description parsed from JSON:
///    1-d: {"type":"disk","center":[re,im],"radius":r}
///        {"type":"halfplane","normal":[re,im],"offset":o}
///        {"type":"full"}
///        {"type":"union1d","parts":[...]}
///   n-d: {"kind":"rectangle","coords":[<1-d>...]}
///        {"kind":"union","members":[...]}
///        {"kind":"complement","inner":{...}}
Region parse_region_json(const std::string& text);

/// Shortest round-trip formatting for a complex value as a JSON [re, im]
/// fragment; used everywhere numbers are emitted so outputs are bit-exact
/// across runs and thread counts.
std::string format_complex(const Complex& z);
std::string format_double(double x);

}  // namespace specflag
