#include "covsel/coverage_model.hpp"

#include <algorithm>
#include <sstream>

#include "covsel/text_util.hpp"

namespace covsel {

CoverageModel::CoverageModel(std::vector<CoveragePoint> points, std::vector<CoverageGroup> groups)
    : points_(std::move(points)), groups_(std::move(groups)) {
    if (points_.empty())
        throw Error("coverage model must contain at least one point");
    if (groups_.empty())
        throw Error("coverage model must contain at least one group");

    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i].id != i)
            throw Error("point ids must be dense 0..n-1");
    for (std::size_t g = 0; g < groups_.size(); ++g)
        if (groups_[g].group_id != g)
            throw Error("group ids must be dense 0..n-1");

    // Partition check: every point appears in exactly one group's list and
    // that group matches the point's own group_id.
    std::vector<int> seen(points_.size(), 0);
    for (const auto& g : groups_) {
        if (g.point_ids.empty())
            throw Error("group '" + g.name + "' has no points");
        for (std::uint32_t pid : g.point_ids) {
            if (pid >= points_.size())
                throw Error("group '" + g.name + "' references unknown point");
            if (seen[pid]++)
                throw Error("point " + std::to_string(pid) + " appears in more than one group");
            if (points_[pid].group_id != g.group_id)
                throw Error("point " + std::to_string(pid) + " group mismatch");
        }
    }
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (!seen[i])
            throw Error("point " + std::to_string(i) + " belongs to no group");

    reachable_.assign(points_.size(), 1);
    reachable_count_ = points_.size();
}

const CoverageGroup& CoverageModel::group_by_name(const std::string& name) const {
    for (const auto& g : groups_)
        if (g.name == name)
            return g;
    throw UnknownGroup("no coverage group named '" + name + "'");
}

void CoverageModel::set_reachability(std::vector<char> reachable) {
    if (reachable.size() != points_.size())
        throw Error("reachability vector size mismatch");
    reachable_ = std::move(reachable);
    reachable_count_ = 0;
    for (char c : reachable_)
        reachable_count_ += (c != 0);
    if (reachable_count_ == 0)
        throw Error("coverage model has no reachable points");
}

HitDatabase::HitDatabase(const CoverageModel& model)
    : model_(&model),
      hit_counts_(model.point_count(), 0),
      group_exercisers_(model.group_count(), 0),
      group_unhit_reachable_(model.group_count(), 0) {
    for (const auto& p : model.points())
        if (model.reachable(p.id))
            ++group_unhit_reachable_[p.group_id];
}

void HitDatabase::record_simulation(std::uint32_t test_id, std::span<const std::uint32_t> points) {
    if (sim_index_.count(test_id))
        throw DuplicateSimulation("test " + std::to_string(test_id) + " simulated twice");

    std::vector<std::uint32_t> hits(points.begin(), points.end());
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());

    std::vector<std::uint32_t> groups;
    for (std::uint32_t pid : hits) {
        if (pid >= hit_counts_.size())
            throw Error("hit references unknown point " + std::to_string(pid));
        if (hit_counts_[pid]++ == 0) {
            ++covered_;
            if (model_->reachable(pid)) {
                ++covered_reachable_;
                --group_unhit_reachable_[model_->points()[pid].group_id];
            }
        }
        std::uint32_t gid = model_->points()[pid].group_id;
        if (groups.empty() || groups.back() != gid)
            if (std::find(groups.begin(), groups.end(), gid) == groups.end())
                groups.push_back(gid);
    }
    std::sort(groups.begin(), groups.end());
    for (std::uint32_t gid : groups)
        ++group_exercisers_[gid];

    sim_index_.emplace(test_id, static_cast<std::uint32_t>(simulated_.size()));
    simulated_.push_back(test_id);
    hits_per_test_.push_back(std::move(hits));
    groups_per_test_.push_back(std::move(groups));
}

double HitDatabase::coverage_percent() const {
    return static_cast<double>(covered_) / static_cast<double>(model_->point_count());
}

double HitDatabase::reachable_coverage_percent() const {
    return static_cast<double>(covered_reachable_) / static_cast<double>(model_->reachable_count());
}

std::vector<std::uint32_t> HitDatabase::target_groups(std::uint64_t min_support) const {
    std::vector<std::uint32_t> out;
    for (std::uint32_t g = 0; g < group_exercisers_.size(); ++g)
        if (group_unhit_reachable_[g] > 0 && group_exercisers_[g] >= min_support)
            out.push_back(g);
    return out;
}

const std::vector<std::uint32_t>& HitDatabase::hits_of(std::uint32_t test_id) const {
    auto it = sim_index_.find(test_id);
    if (it == sim_index_.end())
        throw Error("test " + std::to_string(test_id) + " was not simulated");
    return hits_per_test_[it->second];
}

bool HitDatabase::test_exercises_group(std::uint32_t test_id, std::uint32_t group_id) const {
    auto it = sim_index_.find(test_id);
    if (it == sim_index_.end())
        throw Error("test " + std::to_string(test_id) + " was not simulated");
    const auto& gs = groups_per_test_[it->second];
    return std::binary_search(gs.begin(), gs.end(), group_id);
}

bool HitDatabase::verify_hit_counts() const {
    std::vector<std::uint64_t> recomputed(hit_counts_.size(), 0);
    for (const auto& hits : hits_per_test_)
        for (std::uint32_t pid : hits)
            ++recomputed[pid];
    return recomputed == hit_counts_;
}

void HitDatabase::save(const std::string& path) const {
    std::ostringstream out;
    out << header_line("hitdb");
    for (std::size_t i = 0; i < simulated_.size(); ++i) {
        out << simulated_[i] << ':';
        const auto& hits = hits_per_test_[i];
        for (std::size_t j = 0; j < hits.size(); ++j)
            out << (j ? "," : " ") << hits[j];
        out << '\n';
    }
    write_file(path, out.str());
}

HitDatabase HitDatabase::load(const std::string& path, const CoverageModel& model) {
    auto lines = read_lines(path);
    expect_header(lines, "hitdb");
    HitDatabase db(model);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty())
            continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("expected 'test_id: points'", i + 1);
        std::uint32_t test_id = static_cast<std::uint32_t>(parse_u64(trim(line.substr(0, colon)), i + 1));
        std::vector<std::uint32_t> pts;
        std::string_view rest = trim(line.substr(colon + 1));
        if (!rest.empty())
            for (auto tok : split_view(rest, ','))
                pts.push_back(static_cast<std::uint32_t>(parse_u64(trim(tok), i + 1)));
        db.record_simulation(test_id, pts);
    }
    return db;
}

} // namespace covsel
