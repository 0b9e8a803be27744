#include "specflag/io.hpp"

#include <fstream>
#include <json.hpp>

namespace specflag {

using nlohmann::json;

namespace {

Complex parse_complex(const json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error(std::string(what) + ": expected a [re, im] pair");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

TupleFile read_tuple_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("JSON parse error in " + path + ": " + e.what());
    }
    TupleFile out;
    if (!doc.is_object() || !doc.contains("k") || !doc.contains("n") ||
        !doc.contains("matrices"))
        throw Error(path + ": expected an object with k, n, matrices");
    if (!doc["k"].is_number_integer() || !doc["n"].is_number_integer())
        throw Error(path + ": k and n must be integers");
    out.k = doc["k"].get<int>();
    out.n = doc["n"].get<int>();
    if (out.k <= 0 || out.n <= 0) throw Error(path + ": k and n must be positive");
    const json& mats = doc["matrices"];
    if (!mats.is_array() || static_cast<int>(mats.size()) != out.n)
        throw Error(path + ": matrices must list n matrices");
    for (int i = 0; i < out.n; ++i) {
        const json& rows = mats[static_cast<size_t>(i)];
        if (!rows.is_array() || static_cast<int>(rows.size()) != out.k)
            throw Error(path + ": matrix " + std::to_string(i) + " must have k rows");
        CMatrix m(out.k, out.k);
        for (int r = 0; r < out.k; ++r) {
            const json& row = rows[static_cast<size_t>(r)];
            if (!row.is_array() || static_cast<int>(row.size()) != out.k)
                throw Error(path + ": matrix " + std::to_string(i) + " row " +
                            std::to_string(r) + " must have k entries");
            for (int c = 0; c < out.k; ++c)
                m(r, c) = parse_complex(row[static_cast<size_t>(c)], "matrix entry");
        }
        if (!m.allFinite()) throw Error(path + ": non-finite entries");
        out.matrices.push_back(std::move(m));
    }
    if (doc.contains("labels")) {
        for (const auto& l : doc["labels"]) out.labels.push_back(l.get<std::string>());
    }
    return out;
}

void write_tuple_file(const std::string& path, const TupleFile& doc) {
    json j;
    j["k"] = doc.k;
    j["n"] = doc.n;
    json mats = json::array();
    for (const auto& m : doc.matrices) {
        json rows = json::array();
        for (int r = 0; r < doc.k; ++r) {
            json row = json::array();
            for (int c = 0; c < doc.k; ++c)
                row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
            rows.push_back(std::move(row));
        }
        mats.push_back(std::move(rows));
    }
    j["matrices"] = std::move(mats);
    if (!doc.labels.empty()) j["labels"] = doc.labels;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

namespace {

Region1D parse_region1d(const json& j) {
    if (!j.is_object() || !j.contains("type")) throw Error("region: 1-d part needs a type");
    const std::string type = j["type"].get<std::string>();
    if (type == "full") return Region1D::full_plane();
    if (type == "disk")
        return Region1D::disk(parse_complex(j.at("center"), "disk center"),
                              j.at("radius").get<double>());
    if (type == "halfplane")
        return Region1D::halfplane(parse_complex(j.at("normal"), "halfplane normal"),
                                   j.at("offset").get<double>());
    if (type == "union1d") {
        Region1D acc = parse_region1d(j.at("parts").at(0));
        for (size_t i = 1; i < j.at("parts").size(); ++i)
            acc = acc.unite(parse_region1d(j.at("parts")[i]));
        return acc;
    }
    throw Error("region: unknown 1-d type '" + type + "'");
}

Region parse_region(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw Error("region: needs a kind");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "rectangle") {
        std::vector<Region1D> coords;
        for (const auto& c : j.at("coords")) coords.push_back(parse_region1d(c));
        return Region::rectangle(std::move(coords));
    }
    if (kind == "union") {
        std::vector<Region> members;
        for (const auto& m : j.at("members")) members.push_back(parse_region(m));
        return Region::union_of(std::move(members));
    }
    if (kind == "complement") return Region::complement(parse_region(j.at("inner")));
    throw Error("region: unknown kind '" + kind + "'");
}

}  // namespace

Region parse_region_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("region JSON parse error: ") + e.what());
    }
    return parse_region(j);
}

std::string format_double(double x) {
    // nlohmann's dump already emits shortest round-trip doubles.
    return json(x).dump();
}

std::string format_complex(const Complex& z) {
    return "[" + format_double(z.real()) + "," + format_double(z.imag()) + "]";
}

}  // namespace specflag
