pub mod al;
pub mod bleu;
pub mod consistency;
pub mod replay;
pub mod simulate;
pub mod trace;
