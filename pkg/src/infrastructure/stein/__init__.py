from .discrepancy import ksd_sample_grad, ksd_u, ksd_v, stein_gram, u_q, u_q_grad_x

__all__ = ["ksd_sample_grad", "ksd_u", "ksd_v", "stein_gram", "u_q", "u_q_grad_x"]
