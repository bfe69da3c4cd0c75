#pragma once

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "vmil/matrix_io.hpp"
#include "vmil/synth.hpp"
#include "vmil/types.hpp"
#include "vmil/video_bag.hpp"

namespace vmil {

using json = nlohmann::json;

// Dataset manifest: JSON Lines. The first line is a header record
//   {"type":"vmil-manifest","version":1,"num_classes":K,"config_hash":H}
// followed by one record per bag
//   {"id":..., "labels":[...], "frame_count":N, "feature_file":relpath}
// Feature matrices live next to the manifest in the binary container of
// matrix_io.hpp.
struct ManifestEntry {
    std::string id;
    std::vector<int> labels;
    int frame_count = 0;
    std::string feature_file;  // relative to the manifest directory; may be empty
};

struct Manifest {
    int num_classes = 0;
    std::string config_hash;
    std::vector<ManifestEntry> entries;
};

inline void write_manifest(const std::string& path, const Manifest& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + path);
    json header = {{"type", "vmil-manifest"},
                   {"version", 1},
                   {"num_classes", m.num_classes},
                   {"config_hash", m.config_hash}};
    out << header.dump() << "\n";
    for (const auto& e : m.entries) {
        json rec = {{"id", e.id},
                    {"labels", e.labels},
                    {"frame_count", e.frame_count},
                    {"feature_file", e.feature_file}};
        out << rec.dump() << "\n";
    }
    if (!out) throw RuntimeAbort("short write: " + path);
}

inline Manifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RuntimeAbort("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw RuntimeAbort("empty manifest: " + path);
    json header = json::parse(line);
    if (header.value("type", "") != "vmil-manifest")
        throw RuntimeAbort("not a vmil manifest: " + path);
    Manifest m;
    m.num_classes = header.at("num_classes").get<int>();
    m.config_hash = header.value("config_hash", "");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        ManifestEntry e;
        e.id = rec.at("id").get<std::string>();
        e.labels = rec.at("labels").get<std::vector<int>>();
        e.frame_count = rec.at("frame_count").get<int>();
        e.feature_file = rec.value("feature_file", "");
        m.entries.push_back(std::move(e));
    }
    return m;
}

// Writes bags as manifest + one feature file each under dir. Feature files
// are named <id>.vmat. Hidden frame labels are kept in the manifest records
// (field "frame_labels") so synthetic ground truth survives the round trip;
// training never reads them.
inline std::string write_dataset(const std::string& dir, const std::vector<VideoBag>& bags,
                                 int num_classes, const std::string& config_hash,
                                 const std::string& manifest_name) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / manifest_name, std::ios::trunc);
    if (!out) throw RuntimeAbort("cannot open for write: " + (fs::path(dir) / manifest_name).string());
    json header = {{"type", "vmil-manifest"},
                   {"version", 1},
                   {"num_classes", num_classes},
                   {"config_hash", config_hash}};
    out << header.dump() << "\n";
    for (const auto& b : bags) {
        require(b.has_features(), "write_dataset: only feature bags are serializable");
        const std::string feature_file = b.id + ".vmat";
        write_matrix((fs::path(dir) / feature_file).string(), *b.features);
        json rec = {{"id", b.id},
                    {"labels", b.video_label.sorted()},
                    {"frame_count", b.frame_count()},
                    {"feature_file", feature_file}};
        if (b.frame_labels) {
            json fl = json::array();
            for (const auto& l : *b.frame_labels) fl.push_back(l.sorted());
            rec["frame_labels"] = fl;
        }
        out << rec.dump() << "\n";
    }
    if (!out) throw RuntimeAbort("short write in dataset dir " + dir);
    return (fs::path(dir) / manifest_name).string();
}

inline std::vector<VideoBag> read_dataset(const std::string& manifest_path) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw RuntimeAbort("cannot open: " + manifest_path);
    const fs::path dir = fs::path(manifest_path).parent_path();
    std::string line;
    if (!std::getline(in, line)) throw RuntimeAbort("empty manifest: " + manifest_path);
    json header = json::parse(line);
    if (header.value("type", "") != "vmil-manifest")
        throw RuntimeAbort("not a vmil manifest: " + manifest_path);
    const int k = header.at("num_classes").get<int>();
    std::vector<VideoBag> bags;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line);
        VideoBag b;
        b.id = rec.at("id").get<std::string>();
        b.video_label = LabelSet(k, rec.at("labels").get<std::vector<int>>());
        const std::string feature_file = rec.value("feature_file", "");
        if (feature_file.empty())
            throw RuntimeAbort("bag " + b.id + " lists no feature file; nothing to load");
        b.features = read_matrix((dir / feature_file).string());
        if (rec.contains("frame_labels")) {
            std::vector<LabelSet> fl;
            for (const auto& arr : rec["frame_labels"])
                fl.emplace_back(k, arr.get<std::vector<int>>());
            b.frame_labels = std::move(fl);
        }
        if (b.frame_count() != rec.at("frame_count").get<int>())
            throw RuntimeAbort("manifest frame_count mismatch for bag " + b.id);
        b.validate();
        bags.push_back(std::move(b));
    }
    return bags;
}

}  // namespace vmil
