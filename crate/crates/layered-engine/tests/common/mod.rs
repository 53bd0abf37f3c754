//! Synthetic stacks shared by the engine tests.

use std::sync::Arc;

use layered_engine::tabular::TabularLayer;
use layered_engine::{LayerStack, QosTriple, ServiceQos};

/// Two-layer stack: a driven bottom layer with three internal service levels
/// and a top layer whose kernel reads the service triple (and optionally the
/// realized bottom next state). All service maps are componentwise monotone
/// and the top reward is non-increasing along dominance.
pub fn two_layer_stack(top_reads_prefix: bool, top_reads_qos: bool) -> LayerStack {
    let rows1 = vec![
        vec![vec![0.7, 0.3], vec![0.2, 0.8]], // external action 0
        vec![vec![0.1, 0.9], vec![0.6, 0.4]], // external action 1
    ];
    let bottom = TabularLayer::driven(2, 2, 3, rows1)
        .with_external_costs(vec![vec![0.0, 0.5], vec![0.1, 0.2]], 1.0)
        .with_internal_costs(vec![vec![0.0, 0.3, 0.6], vec![0.1, 0.2, 0.5]], 1.0)
        .with_service(Box::new(|s, b, _| {
            let loss = [[0.5, 0.2, 0.05], [0.8, 0.4, 0.1]][s][b];
            let time = [[1.0, 1.5, 2.5], [1.2, 1.8, 3.0]][s][b];
            ServiceQos { loss, time_s: time }
        }));

    let mut top = TabularLayer::top(
        3,
        2,
        2,
        Box::new(|s, z: &QosTriple| {
            3.0 * (1.0 - z.loss) + 1.0 / (0.5 + z.time_s) + s as f64 * 0.5 - z.cost
        }),
        Box::new(move |prefix: &[usize], state: &[usize], a, z: &QosTriple, out: &mut [f64]| {
            let bias = if top_reads_prefix { prefix[0] as f64 } else { 0.0 };
            let qos_pull = if top_reads_qos { 2.0 * (1.0 - z.loss) } else { 0.0 };
            let w0 = 1.0 + bias;
            let w1 = 1.0 + qos_pull + a as f64;
            let w2 = 0.5 + state[1] as f64 * 0.3;
            let sum = w0 + w1 + w2;
            out[0] = w0 / sum;
            out[1] = w1 / sum;
            out[2] = w2 / sum;
        }),
    )
    .with_external_costs(vec![vec![0.0, 0.4]; 3], 1.0)
    .with_internal_costs(vec![vec![0.0, 0.25]; 3], 1.0)
    .with_service(Box::new(|_s, b, lower: Option<&QosTriple>| {
        let z = lower.unwrap();
        let factor = [1.0, 0.6][b];
        ServiceQos {
            loss: z.loss * factor,
            time_s: z.time_s * (1.0 + 0.5 * b as f64),
        }
    }));
    if top_reads_prefix {
        top = top.with_prefix_dependence();
    }

    LayerStack::new(vec![Arc::new(bottom), Arc::new(top)]).unwrap()
}

/// Three-layer stack for message-channel tests: bottom and middle driven,
/// top reads the service triple.
pub fn three_layer_stack() -> LayerStack {
    let rows1 = vec![vec![vec![0.6, 0.4], vec![0.3, 0.7]]];
    let bottom = TabularLayer::driven(2, 1, 2, rows1).with_service(Box::new(|s, b, _| ServiceQos {
        loss: [[0.4, 0.1], [0.6, 0.2]][s][b],
        time_s: [[1.0, 2.0], [1.5, 2.5]][s][b],
    }));

    let rows2 = vec![
        vec![vec![0.9, 0.1], vec![0.5, 0.5]],
        vec![vec![0.2, 0.8], vec![0.4, 0.6]],
    ];
    let middle = TabularLayer::driven(2, 2, 2, rows2)
        .with_external_costs(vec![vec![0.0, 0.3]; 2], 1.0)
        .with_internal_costs(vec![vec![0.0, 0.2]; 2], 1.0)
        .with_service(Box::new(|s, b, lower: Option<&QosTriple>| {
            let z = lower.unwrap();
            let share = [0.5, 1.0][s];
            let keep = [1.0, 0.5][b];
            ServiceQos {
                loss: z.loss * keep,
                time_s: z.time_s / share * (1.0 + b as f64 * 0.3),
            }
        }));

    let top = TabularLayer::top(
        2,
        2,
        1,
        Box::new(|s, z: &QosTriple| 2.0 * (1.0 - z.loss) - 0.2 * z.time_s + s as f64 - z.cost),
        Box::new(|_prefix, _state, a, z: &QosTriple, out: &mut [f64]| {
            let w0 = 1.0 + a as f64 + z.loss;
            let w1 = 1.0 + (1.0 - z.loss);
            let sum = w0 + w1;
            out[0] = w0 / sum;
            out[1] = w1 / sum;
        }),
    )
    .with_external_costs(vec![vec![0.0, 0.1]; 2], 1.0);

    LayerStack::new(vec![Arc::new(bottom), Arc::new(middle), Arc::new(top)]).unwrap()
}
