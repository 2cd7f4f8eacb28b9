#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "tokx/common.hpp"

namespace tokx {

// Every CLI run writes one of these next to its artifacts. The manifest
// carries everything needed to reproduce the run (subcommand, seed, all
// parameters); no timestamps or host state, so manifests themselves are
// byte-stable and identical manifests imply identical outputs.
struct Manifest {
    std::string subcommand;
    nlohmann::json params; // flag name -> value, including "seed"

    nlohmann::json to_json() const {
        return {{"tool", kToolName}, {"version", kToolVersion}, {"subcommand", subcommand}, {"params", params}};
    }

    static Manifest from_json(const nlohmann::json &j) {
        Manifest m;
        if (j.value("tool", "") != kToolName)
            throw InvalidArgument("manifest was not written by this tool");
        m.subcommand = j.at("subcommand").get<std::string>();
        m.params = j.at("params");
        return m;
    }

    void save(const std::string &path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write manifest: " + path);
        out << to_json().dump(2) << '\n';
        if (!out) throw IoError("write error: " + path);
    }

    static Manifest load(const std::string &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open manifest: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception &e) {
            throw InvalidArgument("malformed manifest '" + path + "': " + e.what());
        }
        return from_json(j);
    }
};

} // namespace tokx
