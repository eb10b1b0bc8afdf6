#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "manikin/errors.hpp"
#include "manikin/geometry.hpp"

namespace manikin {

enum class GroupBehavior { Seek, Queue, Evacuate };

inline const char* group_behavior_name(GroupBehavior b) {
  switch (b) {
    case GroupBehavior::Seek: return "Seek";
    case GroupBehavior::Queue: return "Queue";
    case GroupBehavior::Evacuate: return "Evacuate";
  }
  return "?";
}

struct CrowdAgent {
  int id = 0;
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
  double max_speed = 1.3;
  int group = -1;
};

struct CrowdGroup {
  int id = 0;
  std::vector<int> members;  // agent ids, ascending
  GroupBehavior behavior = GroupBehavior::Seek;
  long formed_tick = 0;
};

struct CrowdObstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

struct CrowdParams {
  double grouping_radius = 2.0;     // r_g
  double goal_tolerance = 2.0;      // goal compatibility radius
  double separation_radius = 0.6;
  double attraction_weight = 1.0;
  double separation_weight = 2.0;
  double cohesion_weight = 0.3;
  double obstacle_weight = 2.0;
  double obstacle_range = 1.0;      // influence band beyond the circle
  double relax_time = 0.5;          // s, velocity relaxation
  double arrive_radius = 0.5;       // slow-down radius around the goal
  double queue_speed_factor = 0.4;  // max-speed scale for Queue behavior
  double dwell_ticks = 2000;        // age before a bottleneck group queues
  Vec2 bottleneck = Vec2::Zero();
  double bottleneck_radius = 0.0;   // 0 = no bottleneck declared
  double min_spacing = 0.4;         // m between spawned agents
};

struct Rect {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
};

struct CrowdWorld {
  std::vector<CrowdAgent> agents;
  std::vector<CrowdGroup> groups;
  std::vector<CrowdObstacle> obstacles;
  CrowdParams params;
  int next_group_id = 0;
};

namespace detail {

/// Platform-stable uniform double in [0, 1); std::uniform_real_distribution
/// is not specified tightly enough for byte-identical runs.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

}  // namespace detail

/// Partition agents into connected components of the compatibility graph
/// (close together and headed to compatible goals). Group ids survive when a
/// component holds the plurality of a previous group's members.
inline std::vector<CrowdGroup> update_groups(std::vector<CrowdAgent>& agents,
                                             double grouping_radius,
                                             double goal_tolerance,
                                             const std::vector<CrowdGroup>& previous,
                                             int& next_group_id, long tick) {
  if (!(grouping_radius > 0.0))
    throw Error(ErrorCode::ValidationError, "update_groups: grouping radius <= 0");
  const int n = static_cast<int>(agents.size());
  auto compatible = [&](const CrowdAgent& a, const CrowdAgent& b) {
    return (a.position - b.position).norm() <= grouping_radius &&
           (a.goal - b.goal).norm() <= goal_tolerance;
  };

  // connected components by BFS in index order
  std::vector<int> comp_of(n, -1);
  std::vector<std::vector<int>> components;
  for (int i = 0; i < n; ++i) {
    if (comp_of[i] != -1) continue;
    std::vector<int> stack{i};
    comp_of[i] = static_cast<int>(components.size());
    std::vector<int> members;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      members.push_back(a);
      for (int b = 0; b < n; ++b) {
        if (comp_of[b] == -1 && compatible(agents[a], agents[b])) {
          comp_of[b] = comp_of[i];
          stack.push_back(b);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }

  // previous group id -> (members as agent ids)
  std::vector<CrowdGroup> out;
  std::vector<char> claimed(previous.size(), 0);
  for (const std::vector<int>& comp : components) {
    // count overlap with each previous group
    int best_prev = -1;
    size_t best_overlap = 0;
    for (size_t g = 0; g < previous.size(); ++g) {
      if (claimed[g]) continue;
      size_t overlap = 0;
      for (int idx : comp) {
        const int aid = agents[idx].id;
        for (int mid : previous[g].members)
          if (mid == aid) { ++overlap; break; }
      }
      const bool plurality = overlap * 2 > previous[g].members.size();
      if (plurality && overlap > best_overlap) {
        best_overlap = overlap;
        best_prev = static_cast<int>(g);
      }
    }
    CrowdGroup grp;
    if (best_prev >= 0) {
      claimed[best_prev] = 1;
      grp.id = previous[best_prev].id;
      grp.behavior = previous[best_prev].behavior;
      grp.formed_tick = previous[best_prev].formed_tick;
    } else {
      grp.id = next_group_id++;
      grp.behavior = GroupBehavior::Seek;
      grp.formed_tick = tick;
    }
    for (int idx : comp) grp.members.push_back(agents[idx].id);
    std::sort(grp.members.begin(), grp.members.end());
    out.push_back(std::move(grp));
  }
  // stable order: by group id
  std::sort(out.begin(), out.end(),
            [](const CrowdGroup& a, const CrowdGroup& b) { return a.id < b.id; });
  for (size_t g = 0; g < out.size(); ++g)
    for (int aid : out[g].members)
      for (auto& agent : agents)
        if (agent.id == aid) agent.group = out[g].id;
  return out;
}

/// One crowd step: steering (goal attraction + separation + group cohesion +
/// obstacle avoidance), speed clamp, integration, group bookkeeping.
inline void crowd_tick(CrowdWorld& crowd, double dt, long tick) {
  if (!(dt > 0.0)) throw Error(ErrorCode::NonPositiveDt, "crowd_tick");
  const CrowdParams& p = crowd.params;
  const int n = static_cast<int>(crowd.agents.size());
  if (n == 0) return;

  // group centroid lookup
  std::map<int, Vec2> centroid;
  std::map<int, int> group_size;
  std::map<int, GroupBehavior> behavior_of;
  for (const CrowdGroup& g : crowd.groups) {
    Vec2 c = Vec2::Zero();
    for (int aid : g.members)
      for (const CrowdAgent& a : crowd.agents)
        if (a.id == aid) c += a.position;
    centroid[g.id] = c / static_cast<double>(g.members.size());
    group_size[g.id] = static_cast<int>(g.members.size());
    behavior_of[g.id] = g.behavior;
  }

  std::vector<Vec2> accel(n, Vec2::Zero());
  for (int i = 0; i < n; ++i) {
    const CrowdAgent& a = crowd.agents[i];
    const bool queuing = a.group >= 0 && behavior_of.count(a.group) &&
                         behavior_of[a.group] == GroupBehavior::Queue;
    const double speed_cap = queuing ? a.max_speed * p.queue_speed_factor
                                     : a.max_speed;

    // goal attraction with arrival slow-down
    const Vec2 to_goal = a.goal - a.position;
    const double d = to_goal.norm();
    Vec2 desired = Vec2::Zero();
    if (d > 1e-9) {
      const double target_speed =
          (d < p.arrive_radius) ? speed_cap * (d / p.arrive_radius) : speed_cap;
      desired = to_goal / d * target_speed;
    }
    Vec2 acc = p.attraction_weight * (desired - a.velocity) / p.relax_time;

    // pairwise separation
    Vec2 sep = Vec2::Zero();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const Vec2 diff = a.position - crowd.agents[j].position;
      const double dist = diff.norm();
      if (dist < p.separation_radius && dist > 1e-9)
        sep += diff / (dist * dist);
    }
    acc += (queuing ? 2.0 : 1.0) * p.separation_weight * sep;

    // cohesion toward the group centroid
    if (a.group >= 0 && group_size.count(a.group) && group_size[a.group] > 1)
      acc += p.cohesion_weight * (centroid[a.group] - a.position);

    // obstacle repulsion
    for (const CrowdObstacle& ob : crowd.obstacles) {
      const Vec2 diff = a.position - ob.center;
      const double dist = diff.norm();
      const double gap = dist - ob.radius;
      if (gap < p.obstacle_range && dist > 1e-9)
        acc += p.obstacle_weight * diff / dist / std::max(gap, 0.05);
    }
    accel[i] = acc;
  }

  for (int i = 0; i < n; ++i) {
    CrowdAgent& a = crowd.agents[i];
    const bool queuing = a.group >= 0 && behavior_of.count(a.group) &&
                         behavior_of[a.group] == GroupBehavior::Queue;
    const double speed_cap = queuing ? a.max_speed * p.queue_speed_factor
                                     : a.max_speed;
    a.velocity += accel[i] * dt;
    const double speed = a.velocity.norm();
    if (speed > speed_cap) a.velocity *= speed_cap / speed;
    a.position += a.velocity * dt;
  }

  // groups change behaviour over time: dwell near the bottleneck -> Queue
  if (p.bottleneck_radius > 0.0) {
    for (CrowdGroup& g : crowd.groups) {
      if (g.behavior != GroupBehavior::Seek) continue;
      if (tick - g.formed_tick < p.dwell_ticks) continue;
      if ((centroid[g.id] - p.bottleneck).norm() <= p.bottleneck_radius)
        g.behavior = GroupBehavior::Queue;
    }
  }

  crowd.groups = update_groups(crowd.agents, p.grouping_radius, p.goal_tolerance,
                               crowd.groups, crowd.next_group_id, tick);
}

/// Deterministic uniform placement with a minimum pairwise spacing.
inline std::vector<CrowdAgent> spawn_crowd(int n, const Rect& region,
                                           const Rect& goal_region,
                                           std::uint64_t seed,
                                           double min_spacing = 0.4,
                                           double max_speed = 1.3) {
  if (n < 1) throw Error(ErrorCode::ValidationError, "spawn_crowd: n < 1");
  std::mt19937_64 rng(seed);
  std::vector<CrowdAgent> agents;
  const int max_attempts = 1000 * n;
  int attempts = 0;
  while (static_cast<int>(agents.size()) < n) {
    if (++attempts > max_attempts)
      throw Error(ErrorCode::RegionTooSmall,
                  "cannot place " + std::to_string(n) + " agents at spacing " +
                      std::to_string(min_spacing));
    Vec2 pos(detail::uniform_in(rng, region.xmin, region.xmax),
             detail::uniform_in(rng, region.ymin, region.ymax));
    bool ok = true;
    for (const CrowdAgent& a : agents)
      if ((a.position - pos).norm() < min_spacing) { ok = false; break; }
    if (!ok) continue;
    CrowdAgent agent;
    agent.id = static_cast<int>(agents.size());
    agent.position = pos;
    agent.goal = Vec2(detail::uniform_in(rng, goal_region.xmin, goal_region.xmax),
                      detail::uniform_in(rng, goal_region.ymin, goal_region.ymax));
    agent.max_speed = max_speed;
    agents.push_back(agent);
  }
  return agents;
}

}  // namespace manikin
