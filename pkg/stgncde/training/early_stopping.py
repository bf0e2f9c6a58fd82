import math


class EarlyStopping:
    """Stops after `patience` consecutive epochs without a strict improvement"""

    def __init__(self, patience: int = 15):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.bad_epochs = 0
        self.should_stop = False

    def update(self, epoch: int, value: float) -> bool:
        """Record a validation score; returns True when it is a new best"""
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            self.bad_epochs = 0
            return True
        self.bad_epochs += 1
        if self.bad_epochs >= self.patience:
            self.should_stop = True
        return False
