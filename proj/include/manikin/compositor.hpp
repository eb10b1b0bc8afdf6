#pragma once

#include "manikin/controllers.hpp"

namespace manikin {

/// Legal phase transitions. Fallen is absorbing; compound moves chain edges.
inline bool legal_phase_transition(CompositorPhase from, CompositorPhase to) {
  using P = CompositorPhase;
  switch (from) {
    case P::Idle: return to == P::Executing;
    case P::Executing:
      return to == P::Idle || to == P::Recovering || to == P::Falling;
    case P::Recovering: return to == P::Executing || to == P::Falling;
    case P::Falling: return to == P::Fallen;
    case P::Fallen: return false;
  }
  return false;
}

/// Among catalog entries that can serve the request kind and whose
/// pre-condition holds, pick the lowest performance score; ties break to the
/// lowest id. Throws NoEligibleController when the eligible set is empty.
inline int select_controller(const MovementRequest& request, const State& s,
                             const WorldView& w, const ControllerCatalog& catalog) {
  int best = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& c : catalog) {
    if (!c->handles(request.kind)) continue;
    if (!c->pre_condition(s, w, request)) continue;
    const double score = c->performance(s, w, request);
    if (score < best_score || (score == best_score && best >= 0 && c->id() < best)) {
      best_score = score;
      best = c->id();
    }
  }
  if (best < 0)
    throw Error(ErrorCode::NoEligibleController,
                std::string("request ") + movement_kind_name(request.kind));
  return best;
}

namespace detail {

inline void set_phase(World& world, ManikinInstance& m, CompositorPhase to) {
  if (m.comp.phase == to) return;
  world.log_event(m.id, "phase_change",
                  json{{"from", phase_name(m.comp.phase)}, {"to", phase_name(to)}});
  m.comp.phase = to;
}

inline void activate(World& world, ManikinInstance& m, const WorldView& view,
                     const ControllerCatalog& catalog, int controller_id,
                     const MovementRequest& request) {
  const Controller* c = find_controller(catalog, controller_id);
  if (!c->pre_condition(m.state, view, request)) {
    ++world.precondition_violations;
    world.log_event(m.id, "failed",
                    json{{"reason", "activation precondition violated"},
                         {"controller", c->name()}});
  }
  m.comp.active = controller_id;
  m.comp.active_request = request;
  m.comp.activation_state = m.state;
  m.comp.ticks_active = 0;
  m.scratch.q_hold = m.state.q;
  m.scratch.gait_phase = 0.0;
  world.log_event(m.id, "activated",
                  json{{"controller", c->name()},
                       {"kind", movement_kind_name(request.kind)}});
}

/// Select + activate for the queue head; marks the manikin blocked when no
/// controller is eligible (the behaviour layer owns the recovery).
inline bool start_queue_head(World& world, ManikinInstance& m,
                             const WorldView& view,
                             const ControllerCatalog& catalog) {
  if (m.queue.empty()) return false;
  try {
    const int id = select_controller(m.queue.front(), m.state, view, catalog);
    activate(world, m, view, catalog, id, m.queue.front());
    return true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoEligibleController) throw;
    world.log_event(m.id, "failed",
                    json{{"reason", "no eligible controller"},
                         {"kind", movement_kind_name(m.queue.front().kind)}});
    m.comp.blocked = true;
    return false;
  }
}

inline MovementRequest synth_request(MovementKind kind) {
  MovementRequest r;
  r.kind = kind;
  return r;
}

inline void clear_active(ManikinInstance& m) {
  m.comp.active.reset();
  m.comp.active_request.reset();
}

}  // namespace detail

/// Velocity impulse on a manikin (e.g. it was hit by a falling object).
inline void inject_disturbance(World& world, int manikin_index, const VecX& impulse) {
  ManikinInstance& m = world.manikins[manikin_index];
  if (impulse.size() != m.skeleton->dof)
    throw Error(ErrorCode::DimensionMismatch, "inject_disturbance");
  m.state.qd += impulse;
  world.log_event(m.id, "disturbed", json{{"norm", impulse.norm()}});
}

/// One simulation step for one manikin: disturbance policy, controller
/// execution, merge through the hybrid solve, integration.
inline void compositor_tick(World& world, int manikin_index,
                            const ControllerCatalog& catalog) {
  using P = CompositorPhase;
  ManikinInstance& m = world.manikins[manikin_index];
  const Skeleton& sk = *m.skeleton;
  const double dt = world.dt;
  WorldView view = make_world_view(world, m);

  // 1. disturbance policy: recover if possible, otherwise fall
  if (m.comp.phase != P::Falling && m.comp.phase != P::Fallen &&
      view.has_support && view.support_distance > 0.0) {
    const MovementRequest recover = detail::synth_request(MovementKind::RecoverBalance);
    int recover_id = -1;
    try {
      recover_id = select_controller(recover, m.state, view, catalog);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoEligibleController) throw;
    }
    if (recover_id >= 0) {
      if (m.comp.phase != P::Recovering) {
        if (m.comp.phase == P::Idle) detail::set_phase(world, m, P::Executing);
        detail::activate(world, m, view, catalog, recover_id, recover);
        detail::set_phase(world, m, P::Recovering);
      }
    } else {
      const MovementRequest fall = detail::synth_request(MovementKind::Fall);
      const int fall_id = select_controller(fall, m.state, view, catalog);
      if (m.comp.phase == P::Idle) detail::set_phase(world, m, P::Executing);
      detail::activate(world, m, view, catalog, fall_id, fall);
      detail::set_phase(world, m, P::Falling);
    }
  }

  // 2. pick up queued work
  if (m.comp.phase == P::Idle && !m.queue.empty() && !m.comp.blocked) {
    if (detail::start_queue_head(world, m, view, catalog))
      detail::set_phase(world, m, P::Executing);
  }

  // 3. run the active controller (or the structural hold)
  ControllerOutput output;
  const Controller* active = nullptr;
  if (m.comp.active) {
    active = find_controller(catalog, *m.comp.active);
    output = active->step(m.state, view, *m.comp.active_request, m.scratch);
    if (active->mode() == ControllerMode::Kinematic && output.torques)
      throw std::logic_error("kinematic controller emitted torques");
    if (active->mode() == ControllerMode::Dynamic && !output.prescribed.empty())
      throw std::logic_error("dynamic controller emitted prescriptions");
  } else if (m.comp.phase == P::Fallen) {
    output.torques = FallController::damping_torques(sk, m.state,
                                                     world.thresholds.fall_damping);
  } else {
    // idle hold: PD toward the default posture
    const int nj = sk.num_joints();
    VecX tau = VecX::Zero(sk.dof);
    tau.head(nj) =
        m.config.kp.cwiseProduct(m.config.q_default.head(nj) - m.state.q.head(nj)) -
        m.config.kd.cwiseProduct(m.state.qd.head(nj));
    output.torques = tau;
  }

  // 4. merge: controller prescriptions, then the idealized foot support
  // (prescribing the free-flyer) while the manikin is not falling
  HybridPartition part;
  part.applied_torques = output.torques ? *output.torques : VecX::Zero(sk.dof);
  std::vector<std::pair<int, double>> presc;
  for (const PrescribedAccel& p : output.prescribed)
    presc.emplace_back(p.index, p.qdd);
  const bool supported =
      m.comp.phase != P::Falling && m.comp.phase != P::Fallen;
  if (sk.free_flyer && supported) {
    const int o = sk.root_dof_offset();
    for (int k = 0; k < 6; ++k) {
      const int idx = o + k;
      bool already = false;
      for (const auto& pr : presc)
        if (pr.first == idx) { already = true; break; }
      if (!already) presc.emplace_back(idx, -m.state.qd[idx] / dt);
    }
  }
  std::sort(presc.begin(), presc.end());
  part.prescribed.reserve(presc.size());
  part.prescribed_qdd.resize(static_cast<int>(presc.size()));
  for (size_t i = 0; i < presc.size(); ++i) {
    part.prescribed.push_back(presc[i].first);
    part.prescribed_qdd[static_cast<int>(i)] = presc[i].second;
  }

  const HybridResult solved = hybrid_solve(sk, m.state, part, world.gravity);
  m.state = step(sk, m.state, solved.qdd, dt);
  ++m.comp.ticks_active;

  // free-falling root is stopped by the ground
  if (sk.free_flyer && !supported) {
    const int zi = sk.root_dof_offset() + 2;
    if (m.state.q[zi] < world.thresholds.ground_root_z) {
      m.state.q[zi] = world.thresholds.ground_root_z;
      if (m.state.qd[zi] < 0.0) m.state.qd[zi] = 0.0;
    }
  }

  // record full generalized torques: applied on free coords, constraint on
  // prescribed coords (kinematic ticks contribute through the latter)
  m.last_tau = part.applied_torques;
  for (int k : part.prescribed) m.last_tau[k] = solved.constraint_torques[k];

  // 5. attachment events
  for (const AttachChange& ac : output.attachments) {
    if (ac.attach) {
      RigidObject* obj = world.find_object(ac.object);
      if (obj == nullptr) continue;
      const std::vector<Transform> poses = forward_kinematics(sk, m.state.q);
      const HandSpec& hs = m.config.hands[ac.hand];
      Transform hand_pose = poses[sk.link_idx(hs.link)];
      hand_pose.translation = hand_pose.apply(hs.point);
      Attachment att;
      att.manikin = m.id;
      att.hand = ac.hand;
      att.object = ac.object;
      att.grasp_index = ac.grasp_index;
      att.hand_to_object = hand_pose.inverse() * obj->pose;
      world.attachments.push_back(att);
    } else {
      for (size_t i = 0; i < world.attachments.size(); ++i) {
        if (world.attachments[i].manikin == m.id &&
            world.attachments[i].hand == ac.hand) {
          world.attachments.erase(world.attachments.begin() +
                                  static_cast<long>(i));
          break;
        }
      }
    }
  }

  // 6. status handling at end of tick
  if (!m.comp.active) return;
  if (output.status == ControllerStatus::Succeeded) {
    world.log_event(m.id, "succeeded",
                    json{{"controller", active->name()},
                         {"kind", movement_kind_name(m.comp.active_request->kind)}});
    detail::clear_active(m);
    WorldView after = make_world_view(world, m);
    if (m.comp.phase == P::Recovering) {
      detail::set_phase(world, m, P::Executing);
      if (m.queue.empty() || m.comp.blocked ||
          !detail::start_queue_head(world, m, after, catalog))
        detail::set_phase(world, m, P::Idle);
    } else if (m.comp.phase == P::Falling) {
      detail::set_phase(world, m, P::Fallen);
    } else {  // Executing
      if (!m.queue.empty()) m.queue.pop_front();
      if (m.queue.empty() || !detail::start_queue_head(world, m, after, catalog))
        detail::set_phase(world, m, P::Idle);
    }
  } else if (output.status == ControllerStatus::Failed) {
    world.log_event(m.id, "failed",
                    json{{"controller", active->name()},
                         {"kind", movement_kind_name(m.comp.active_request->kind)}});
    detail::clear_active(m);
    if (m.comp.phase == P::Recovering) {
      WorldView after = make_world_view(world, m);
      const MovementRequest fall = detail::synth_request(MovementKind::Fall);
      detail::activate(world, m, after, catalog,
                       select_controller(fall, m.state, after, catalog), fall);
      detail::set_phase(world, m, P::Falling);
    } else {  // Executing: the behaviour layer owns replanning
      m.comp.blocked = true;
      detail::set_phase(world, m, P::Idle);
    }
  }
}

}  // namespace manikin
