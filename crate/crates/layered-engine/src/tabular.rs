//! Data-driven layers for synthetic stacks: everything (costs, service maps,
//! transition rows, top rewards) is supplied as tables or closures. Used to
//! build small instances in tests and experiments.

use crate::layer::{Layer, ServiceQos};
use crate::qos::QosTriple;

type ServiceFn = dyn Fn(usize, usize, Option<&QosTriple>) -> ServiceQos + Send + Sync;
type TopRewardFn = dyn Fn(usize, &QosTriple) -> f64 + Send + Sync;
type TopRowFn = dyn Fn(&[usize], &[usize], usize, &QosTriple, &mut [f64]) + Send + Sync;

pub struct TabularLayer {
    states: usize,
    external: usize,
    internal: usize,
    lambda_ext: f64,
    lambda_int: f64,
    /// `ext_cost[s][a]`, `int_cost[s][b]`
    ext_cost: Vec<Vec<f64>>,
    int_cost: Vec<Vec<f64>>,
    service: Box<ServiceFn>,
    /// `rows[a][s]`: next-state rows of a driven layer (prefix-independent).
    rows: Vec<Vec<Vec<f64>>>,
    top_reward: Option<Box<TopRewardFn>>,
    top_rows: Option<Box<TopRowFn>>,
    prefix_dependent: bool,
}

impl TabularLayer {
    pub fn driven(
        states: usize,
        external: usize,
        internal: usize,
        rows: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        Self {
            states,
            external,
            internal,
            lambda_ext: 1.0,
            lambda_int: 1.0,
            ext_cost: vec![vec![0.0; external.max(1)]; states],
            int_cost: vec![vec![0.0; internal.max(1)]; states],
            service: Box::new(|_, _, lower| match lower {
                Some(z) => ServiceQos {
                    loss: z.loss,
                    time_s: z.time_s,
                },
                None => ServiceQos {
                    loss: 0.0,
                    time_s: 1.0,
                },
            }),
            rows,
            top_reward: None,
            top_rows: None,
            prefix_dependent: false,
        }
    }

    /// Top layer with explicit reward and transition closures.
    pub fn top(
        states: usize,
        external: usize,
        internal: usize,
        top_reward: Box<TopRewardFn>,
        top_rows: Box<TopRowFn>,
    ) -> Self {
        Self {
            states,
            external,
            internal,
            lambda_ext: 1.0,
            lambda_int: 1.0,
            ext_cost: vec![vec![0.0; external.max(1)]; states],
            int_cost: vec![vec![0.0; internal.max(1)]; states],
            service: Box::new(|_, _, lower| match lower {
                Some(z) => ServiceQos {
                    loss: z.loss,
                    time_s: z.time_s,
                },
                None => ServiceQos {
                    loss: 0.0,
                    time_s: 1.0,
                },
            }),
            rows: Vec::new(),
            top_reward: Some(top_reward),
            top_rows: Some(top_rows),
            prefix_dependent: false,
        }
    }

    pub fn with_external_costs(mut self, costs: Vec<Vec<f64>>, lambda: f64) -> Self {
        self.ext_cost = costs;
        self.lambda_ext = lambda;
        self
    }

    pub fn with_internal_costs(mut self, costs: Vec<Vec<f64>>, lambda: f64) -> Self {
        self.int_cost = costs;
        self.lambda_int = lambda;
        self
    }

    pub fn with_service(
        mut self,
        service: Box<ServiceFn>,
    ) -> Self {
        self.service = service;
        self
    }

    /// Declare that this layer's transition rows read the realized next
    /// states of the layers below (top layers only, via `top_rows`).
    pub fn with_prefix_dependence(mut self) -> Self {
        self.prefix_dependent = true;
        self
    }
}

impl Layer for TabularLayer {
    fn state_count(&self) -> usize {
        self.states
    }

    fn external_count(&self) -> usize {
        self.external.max(1)
    }

    fn internal_count(&self) -> usize {
        self.internal.max(1)
    }

    fn external_cost(&self, s_l: usize, a_l: usize) -> f64 {
        self.ext_cost[s_l][a_l]
    }

    fn internal_cost(&self, s_l: usize, b_l: usize) -> f64 {
        self.int_cost[s_l][b_l]
    }

    fn external_multiplier(&self) -> f64 {
        self.lambda_ext
    }

    fn internal_multiplier(&self) -> f64 {
        self.lambda_int
    }

    fn service(&self, s_l: usize, b_l: usize, lower: Option<&QosTriple>) -> ServiceQos {
        (self.service)(s_l, b_l, lower)
    }

    fn transition_row(&self, _next_prefix: &[usize], s_l: usize, a_l: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.rows[a_l][s_l]);
    }

    fn depends_on_next_prefix(&self) -> bool {
        self.prefix_dependent
    }

    fn internal_reward(&self, s_l: usize, qos: &QosTriple) -> f64 {
        (self.top_reward.as_ref().expect("top layer needs a reward"))(s_l, qos)
    }

    fn top_transition_row(
        &self,
        next_prefix: &[usize],
        state: &[usize],
        a_l: usize,
        qos: &QosTriple,
        out: &mut [f64],
    ) {
        (self.top_rows.as_ref().expect("top layer needs transition rows"))(
            next_prefix,
            state,
            a_l,
            qos,
            out,
        );
    }
}
