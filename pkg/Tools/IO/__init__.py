"""
数据读写工具模块

- core: 路径/并发配置与原子写入
- Read: CSV 时间序列与三元组邻接矩阵读取
- Write: 结果序列化

子包按需导入，避免与 Selection / Evaluation 之间的循环引用。
"""
