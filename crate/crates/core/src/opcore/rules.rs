//! Built-in evaluation rules referenced by id from registry files.

use std::f64::consts::PI;

/// Largest argument accepted by factorial, choose and permutation.
pub const FACTORIAL_CAP: f64 = 170.0;

const INTEGER_EPS: f64 = 1e-9;
const ZERO_EPS: f64 = 1e-12;

pub type RuleFn = fn(&[f64]) -> Result<f64, String>;

#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub id: &'static str,
    pub arity: usize,
    pub apply: RuleFn,
}

fn div(a: f64, b: f64) -> Result<f64, String> {
    if b.abs() <= ZERO_EPS {
        Err(format!("division by zero ({a} / {b})"))
    } else {
        Ok(a / b)
    }
}

fn integer(x: f64, what: &str) -> Result<i64, String> {
    let r = x.round();
    if (x - r).abs() > INTEGER_EPS || r.abs() > 9.0e15 {
        Err(format!("{what} requires an integer, got {x}"))
    } else {
        Ok(r as i64)
    }
}

fn bounded_count(x: f64, what: &str) -> Result<u32, String> {
    let n = integer(x, what)?;
    if n < 0 || n as f64 > FACTORIAL_CAP {
        Err(format!("{what} argument {x} outside 0..=170"))
    } else {
        Ok(n as u32)
    }
}

fn sqrt(x: f64) -> Result<f64, String> {
    if x < 0.0 {
        Err(format!("square root of negative {x}"))
    } else {
        Ok(x.sqrt())
    }
}

fn factorial(n: u32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// n! / (n-k)! as an iterative product.
fn falling(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

macro_rules! rule {
    ($id:literal, $arity:literal, |$a:ident| $body:expr) => {
        Rule {
            id: $id,
            arity: $arity,
            apply: |$a: &[f64]| $body,
        }
    };
}

pub static RULES: &[Rule] = &[
    rule!("add", 2, |a| Ok(a[0] + a[1])),
    rule!("subtract", 2, |a| Ok(a[0] - a[1])),
    rule!("multiply", 2, |a| Ok(a[0] * a[1])),
    rule!("divide", 2, |a| div(a[0], a[1])),
    rule!("negate", 1, |a| Ok(-a[0])),
    rule!("inverse", 1, |a| div(1.0, a[0])),
    rule!("power", 2, |a| Ok(a[0].powf(a[1]))),
    rule!("sqrt", 1, |a| sqrt(a[0])),
    rule!("log", 1, |a| {
        if a[0] <= 0.0 {
            Err(format!("logarithm of non-positive {}", a[0]))
        } else {
            Ok(a[0].ln())
        }
    }),
    rule!("floor", 1, |a| Ok(a[0].floor())),
    rule!("max", 2, |a| Ok(a[0].max(a[1]))),
    rule!("min", 2, |a| Ok(a[0].min(a[1]))),
    rule!("reminder", 2, |a| {
        if a[1].abs() <= ZERO_EPS {
            Err(format!("remainder by zero ({} mod {})", a[0], a[1]))
        } else {
            Ok(a[0] % a[1])
        }
    }),
    rule!("gcd", 2, |a| {
        let (x, y) = (integer(a[0], "gcd")?, integer(a[1], "gcd")?);
        Ok(gcd(x, y) as f64)
    }),
    rule!("lcm", 2, |a| {
        let (x, y) = (integer(a[0], "lcm")?, integer(a[1], "lcm")?);
        if x == 0 || y == 0 {
            return Ok(0.0);
        }
        Ok((x.abs() as f64 / gcd(x, y) as f64) * y.abs() as f64)
    }),
    rule!("sum_consecutive_number", 1, |a| {
        let n = integer(a[0], "sum_consecutive_number")?;
        if n < 0 {
            return Err(format!("sum_consecutive_number of negative {n}"));
        }
        Ok(n as f64 * (n as f64 + 1.0) / 2.0)
    }),
    rule!("factorial", 1, |a| Ok(factorial(bounded_count(a[0], "factorial")?))),
    rule!("choose", 2, |a| {
        let n = bounded_count(a[0], "choose")?;
        let k = bounded_count(a[1], "choose")?;
        if k > n {
            return Ok(0.0);
        }
        let k = k.min(n - k);
        Ok((falling(n, k) / factorial(k)).round())
    }),
    rule!("permutation", 2, |a| {
        let n = bounded_count(a[0], "permutation")?;
        let k = bounded_count(a[1], "permutation")?;
        if k > n {
            return Ok(0.0);
        }
        Ok(falling(n, k))
    }),
    rule!("radians_to_degress", 1, |a| Ok(a[0] * 180.0 / PI)),
    rule!("degree_to_radians", 1, |a| Ok(a[0] * PI / 180.0)),
    // geometry
    rule!("circle_area", 1, |a| Ok(PI * a[0] * a[0])),
    rule!("circumface", 1, |a| Ok(2.0 * PI * a[0])),
    rule!("circle_arc", 2, |a| Ok(2.0 * PI * a[0] * a[1] / 360.0)),
    rule!("semi_circle_perimiter", 1, |a| Ok(PI * a[0] + 2.0 * a[0])),
    rule!("circle_sector_area", 2, |a| Ok(PI * a[0] * a[0] * a[1] / 360.0)),
    rule!("rectangle_perimeter", 2, |a| Ok(2.0 * (a[0] + a[1]))),
    rule!("rectangle_area", 2, |a| Ok(a[0] * a[1])),
    rule!("trapezium_area", 3, |a| Ok((a[0] + a[1]) * a[2] / 2.0)),
    rule!("rhombus_area", 2, |a| Ok(a[0] * a[1] / 2.0)),
    rule!("quadrilateral_area", 3, |a| Ok(a[0] * (a[1] + a[2]) / 2.0)),
    rule!("square_area", 1, |a| Ok(a[0] * a[0])),
    rule!("square_perimeter", 1, |a| Ok(4.0 * a[0])),
    rule!("square_edge_by_perimeter", 1, |a| Ok(a[0] / 4.0)),
    rule!("square_edge_by_area", 1, |a| sqrt(a[0])),
    rule!("side_by_diagonal", 1, |a| Ok(a[0] / 2f64.sqrt())),
    rule!("diagonal", 2, |a| Ok((a[0] * a[0] + a[1] * a[1]).sqrt())),
    rule!("triangle_area", 2, |a| Ok(a[0] * a[1] / 2.0)),
    rule!("triangle_perimeter", 3, |a| Ok(a[0] + a[1] + a[2])),
    rule!("triangle_area_three_edges", 3, |a| {
        let s = (a[0] + a[1] + a[2]) / 2.0;
        let sq = s * (s - a[0]) * (s - a[1]) * (s - a[2]);
        if sq < 0.0 {
            Err(format!("no triangle with edges {}, {}, {}", a[0], a[1], a[2]))
        } else {
            Ok(sq.sqrt())
        }
    }),
    rule!("volume_cube", 1, |a| Ok(a[0].powi(3))),
    rule!("surface_cube", 1, |a| Ok(6.0 * a[0] * a[0])),
    rule!("cube_edge_by_volume", 1, |a| Ok(a[0].cbrt())),
    rule!("volume_rectangular_prism", 3, |a| Ok(a[0] * a[1] * a[2])),
    rule!("surface_rectangular_prism", 3, |a| {
        Ok(2.0 * (a[0] * a[1] + a[1] * a[2] + a[0] * a[2]))
    }),
    rule!("volume_cylinder", 2, |a| Ok(PI * a[0] * a[0] * a[1])),
    rule!("surface_cylinder", 2, |a| Ok(2.0 * PI * a[0] * (a[0] + a[1]))),
    rule!("volume_cone", 2, |a| Ok(PI * a[0] * a[0] * a[1] / 3.0)),
    rule!("surface_cone", 2, |a| Ok(PI * a[0] * (a[0] + a[1]))),
    rule!("volume_sphere", 1, |a| Ok(4.0 / 3.0 * PI * a[0].powi(3))),
    rule!("surface_sphere", 1, |a| Ok(4.0 * PI * a[0] * a[0])),
    // physics
    rule!("speed", 2, |a| div(a[0], a[1])),
    rule!("stream_speed", 2, |a| Ok((a[0] - a[1]) / 2.0)),
    rule!("speed_in_still_water", 2, |a| Ok((a[0] + a[1]) / 2.0)),
    // gain-loss; first argument is the percentage
    rule!("p_after_gain", 2, |a| Ok(a[1] * (100.0 + a[0]) / 100.0)),
    rule!("p_after_loss", 2, |a| Ok(a[1] * (100.0 - a[0]) / 100.0)),
    rule!("original_price_before_gain", 2, |a| div(a[1] * 100.0, 100.0 + a[0])),
    rule!("original_price_before_loss", 2, |a| div(a[1] * 100.0, 100.0 - a[0])),
];

pub fn lookup_rule(id: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.id == id)
}
