//! Leading-order operation counts of one elementwise product.

use nurbs_sem::assembly::op_count;
use nurbs_sem::basis::MethodKind;

fn main() {
    print!("{:>3}", "n");
    for k in MethodKind::ALL {
        print!("{:>14}", k.name());
    }
    println!();
    for n in 1..=10 {
        print!("{n:>3}");
        for k in MethodKind::ALL {
            print!("{:>14}", op_count(k, n));
        }
        println!();
    }
}
