from .trainer import TrainConfig, gradient_check, learning_rate, train
